use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::expr::{parse_coefficient, CoefficientExpr};
use crate::error::{DdeError, Result};
use crate::scalar::{cx, Cx, Real};

/// Dense complex matrix over `T`.
pub type CMat<T> = DMatrix<Cx<T>>;

/// Pointwise coefficient `t -> d x d` matrix.
pub type PointCoefficient<T> = Arc<dyn Fn(T) -> CMat<T> + Send + Sync>;
/// Distributed kernel `(t, theta) -> d x d` matrix, `theta` in `[-tau, 0]`.
pub type KernelCoefficient<T> = Arc<dyn Fn(T, T) -> CMat<T> + Send + Sync>;

/// Linear delay equation
/// `x'(t) = a(t) x(t) + b(t) x(t - tau) + int_{-tau}^0 c(t, theta) x(t + theta) dtheta`
/// posed on the window `[s, r]`.
///
/// An absent coefficient is identically zero and is skipped during assembly.
#[derive(Clone)]
pub struct DdeProblem<T: Real> {
    dim: usize,
    tau: T,
    s: T,
    r: T,
    a: Option<PointCoefficient<T>>,
    b: Option<PointCoefficient<T>>,
    c: Option<KernelCoefficient<T>>,
    real: bool,
}

impl<T: Real> fmt::Debug for DdeProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DdeProblem")
            .field("dim", &self.dim)
            .field("tau", &self.tau)
            .field("s", &self.s)
            .field("r", &self.r)
            .field("a", &self.a.is_some())
            .field("b", &self.b.is_some())
            .field("c", &self.c.is_some())
            .finish()
    }
}

fn real_to_complex<T: Real>(m: &DMatrix<T>) -> CMat<T> {
    m.map(cx)
}

impl<T: Real> DdeProblem<T> {
    /// Problem with all coefficients zero.
    pub fn new(dim: usize, tau: T, s: T, r: T) -> Result<Self> {
        if dim == 0 {
            return Err(DdeError::InvalidProblem("dimension must be at least 1".into()));
        }
        if !(tau > T::zero()) {
            return Err(DdeError::InvalidProblem(format!("delay must be positive, got {tau}")));
        }
        if !(r >= s) {
            return Err(DdeError::InvalidProblem(format!("window end {r} precedes start {s}")));
        }
        Ok(Self {
            dim,
            tau,
            s,
            r,
            a: None,
            b: None,
            c: None,
            real: true,
        })
    }

    pub fn with_a(mut self, f: impl Fn(T) -> CMat<T> + Send + Sync + 'static) -> Self {
        self.a = Some(Arc::new(f));
        self.real = false;
        self
    }

    pub fn with_b(mut self, f: impl Fn(T) -> CMat<T> + Send + Sync + 'static) -> Self {
        self.b = Some(Arc::new(f));
        self.real = false;
        self
    }

    pub fn with_c(mut self, f: impl Fn(T, T) -> CMat<T> + Send + Sync + 'static) -> Self {
        self.c = Some(Arc::new(f));
        self.real = false;
        self
    }

    pub fn with_a_real(mut self, f: impl Fn(T) -> DMatrix<T> + Send + Sync + 'static) -> Self {
        self.a = Some(Arc::new(move |t| real_to_complex(&f(t))));
        self
    }

    pub fn with_b_real(mut self, f: impl Fn(T) -> DMatrix<T> + Send + Sync + 'static) -> Self {
        self.b = Some(Arc::new(move |t| real_to_complex(&f(t))));
        self
    }

    pub fn with_c_real(mut self, f: impl Fn(T, T) -> DMatrix<T> + Send + Sync + 'static) -> Self {
        self.c = Some(Arc::new(move |t, th| real_to_complex(&f(t, th))));
        self
    }

    /// Scalar convenience: `a(t) = f(t)` for `d = 1`.
    pub fn with_scalar_a(self, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.with_a_real(move |t| DMatrix::from_element(1, 1, f(t)))
    }

    pub fn with_scalar_b(self, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.with_b_real(move |t| DMatrix::from_element(1, 1, f(t)))
    }

    pub fn with_scalar_c(self, f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        self.with_c_real(move |t, th| DMatrix::from_element(1, 1, f(t, th)))
    }

    /// Builds coefficients from entrywise expression grids (`d x d`, row major).
    /// `None` or an all-literal-zero grid means the coefficient vanishes.
    pub fn from_expressions(
        dim: usize,
        tau: T,
        s: T,
        r: T,
        a: Option<&ExprMatrix>,
        b: Option<&ExprMatrix>,
        c: Option<&ExprMatrix>,
    ) -> Result<Self> {
        let mut p = Self::new(dim, tau, s, r)?;
        for (name, m) in [("a", a), ("b", b), ("c", c)] {
            if let Some(m) = m {
                if m.dim() != dim {
                    return Err(DdeError::InvalidProblem(format!(
                        "coefficient {name} is {0}x{0}, expected {dim}x{dim}",
                        m.dim()
                    )));
                }
                if name != "c" && m.uses_theta() {
                    return Err(DdeError::InvalidProblem(format!(
                        "coefficient {name} must not depend on theta"
                    )));
                }
            }
        }
        if let Some(m) = a.filter(|m| !m.is_zero()) {
            let m = m.clone();
            p = p.with_a_real(move |t| m.eval(t, T::zero()));
        }
        if let Some(m) = b.filter(|m| !m.is_zero()) {
            let m = m.clone();
            p = p.with_b_real(move |t| m.eval(t, T::zero()));
        }
        if let Some(m) = c.filter(|m| !m.is_zero()) {
            let m = m.clone();
            p = p.with_c_real(move |t, th| m.eval(t, th));
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn start(&self) -> T {
        self.s
    }

    pub fn end(&self) -> T {
        self.r
    }

    /// Same coefficients on a different window `[s, r]`.
    pub fn with_window(&self, s: T, r: T) -> Result<Self> {
        if !(r >= s) {
            return Err(DdeError::InvalidProblem(format!("window end {r} precedes start {s}")));
        }
        let mut p = self.clone();
        p.s = s;
        p.r = r;
        Ok(p)
    }

    /// Whether every coefficient was supplied as a real-valued map.
    pub fn has_real_coefficients(&self) -> bool {
        self.real
    }

    pub fn has_a(&self) -> bool {
        self.a.is_some()
    }

    pub fn has_b(&self) -> bool {
        self.b.is_some()
    }

    pub fn has_c(&self) -> bool {
        self.c.is_some()
    }

    fn check(&self, name: &str, m: CMat<T>, t: T) -> Result<CMat<T>> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(DdeError::Coefficient(format!(
                "{name}({t}) has shape {}x{}, expected {d}x{d}",
                m.nrows(),
                m.ncols(),
                d = self.dim
            )));
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(DdeError::Coefficient(format!("{name}({t}) is not finite")));
        }
        Ok(m)
    }

    /// `a(t)`, zero when absent.
    pub fn a(&self, t: T) -> Result<CMat<T>> {
        match &self.a {
            Some(f) => self.check("a", f(t), t),
            None => Ok(CMat::zeros(self.dim, self.dim)),
        }
    }

    pub fn b(&self, t: T) -> Result<CMat<T>> {
        match &self.b {
            Some(f) => self.check("b", f(t), t),
            None => Ok(CMat::zeros(self.dim, self.dim)),
        }
    }

    pub fn c(&self, t: T, theta: T) -> Result<CMat<T>> {
        match &self.c {
            Some(f) => self.check("c", f(t, theta), t),
            None => Ok(CMat::zeros(self.dim, self.dim)),
        }
    }
}

/// `d x d` grid of coefficient expressions, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMatrix {
    dim: usize,
    entries: Vec<CoefficientExpr>,
}

impl ExprMatrix {
    pub fn new(dim: usize, entries: Vec<CoefficientExpr>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(DdeError::LengthMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn scalar(e: CoefficientExpr) -> Self {
        Self {
            dim: 1,
            entries: vec![e],
        }
    }

    /// Parses `"e11, e12; e21, e22"` (rows separated by `;`, entries by `,`).
    pub fn parse(src: &str, allow_theta: bool) -> Result<Self> {
        let rows: Vec<&str> = src.split(';').collect();
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            let cols: Vec<&str> = row.split(',').collect();
            if cols.len() != dim {
                return Err(DdeError::InvalidProblem(format!(
                    "coefficient grid `{src}` is not square ({} entries in a row of a {dim}-row grid)",
                    cols.len()
                )));
            }
            for c in cols {
                entries.push(parse_coefficient(c.trim(), allow_theta)?);
            }
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[CoefficientExpr] {
        &self.entries
    }

    pub fn uses_theta(&self) -> bool {
        self.entries.iter().any(|e| e.ast.uses_theta())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.ast.is_zero_literal())
    }

    pub fn eval<T: Real>(&self, t: T, theta: T) -> DMatrix<T> {
        DMatrix::from_row_iterator(self.dim, self.dim, self.entries.iter().map(|e| e.eval(t, theta)))
    }
}

/// Problem translated to the window `[0, r - s]`.
#[derive(Clone, Debug)]
pub struct ShiftedProblem<T: Real> {
    base: DdeProblem<T>,
    rs: T,
}

/// `t -> s + t` applied to every coefficient.
pub fn shift_problem<T: Real>(p: &DdeProblem<T>) -> ShiftedProblem<T> {
    ShiftedProblem {
        base: p.clone(),
        rs: p.r - p.s,
    }
}

impl<T: Real> ShiftedProblem<T> {
    pub fn rs(&self) -> T {
        self.rs
    }

    pub fn tau(&self) -> T {
        self.base.tau
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    pub fn original(&self) -> &DdeProblem<T> {
        &self.base
    }

    pub fn a_s(&self, t: T) -> Result<CMat<T>> {
        self.base.a(self.base.s + t)
    }

    pub fn b_s(&self, t: T) -> Result<CMat<T>> {
        self.base.b(self.base.s + t)
    }

    pub fn c_s(&self, t: T, theta: T) -> Result<CMat<T>> {
        self.base.c(self.base.s + t, theta)
    }

    pub fn has_a(&self) -> bool {
        self.base.has_a()
    }

    pub fn has_b(&self) -> bool {
        self.base.has_b()
    }

    pub fn has_c(&self) -> bool {
        self.base.has_c()
    }
}

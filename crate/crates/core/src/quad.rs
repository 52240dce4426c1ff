//! Quadrature rules on `[-1, 1]` mapped to the integration windows of the
//! distributed-delay terms.

use std::ops::Add;

use nalgebra::{DMatrix, DVector};

use crate::error::{DdeError, Result};
use crate::scalar::{Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadKind {
    ClenshawCurtis,
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T: Real> {
    kind: QuadKind,
    abscissae: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn new(kind: QuadKind, points: usize) -> Result<Self> {
        match kind {
            QuadKind::GaussLegendre => gauss_legendre(points),
            QuadKind::ClenshawCurtis => clenshaw_curtis(points),
        }
    }

    /// Gauss-Legendre rule sized for collocation degree `n`: `max(ceil((n + 3) / 2), 8)` points.
    pub fn default_for_degree(n: usize) -> Self {
        gauss_legendre(default_points(n)).expect("positive point count")
    }

    pub fn kind(&self) -> QuadKind {
        self.kind
    }

    pub fn points(&self) -> usize {
        self.abscissae.len()
    }

    pub fn abscissae(&self) -> &[T] {
        &self.abscissae
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Highest monomial degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        match self.kind {
            QuadKind::GaussLegendre => 2 * self.points() - 1,
            QuadKind::ClenshawCurtis => self.points().saturating_sub(1),
        }
    }

    /// Nodes and weights affinely mapped to `[lo, hi]`; empty when `lo == hi`.
    pub fn mapped(&self, lo: T, hi: T) -> Vec<(T, T)> {
        if lo == hi {
            return Vec::new();
        }
        let half = (hi - lo) / T::lit(2.0);
        let mid = (hi + lo) / T::lit(2.0);
        self.abscissae
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect()
    }
}

pub fn default_points(n: usize) -> usize {
    (n + 3).div_ceil(2).max(8)
}

/// Values that can be accumulated by a quadrature sum.
pub trait Integrand<T: Real>: Sized {
    fn scaled(self, w: T) -> Self;
    fn sum(self, other: Self) -> Self;
}

impl<T: Real> Integrand<T> for T {
    fn scaled(self, w: T) -> Self {
        self * w
    }
    fn sum(self, other: Self) -> Self {
        self + other
    }
}

impl<T: Real> Integrand<T> for Cx<T> {
    fn scaled(self, w: T) -> Self {
        Cx::scale(&self, w)
    }
    fn sum(self, other: Self) -> Self {
        self + other
    }
}

impl<T: Real> Integrand<T> for DMatrix<Cx<T>> {
    fn scaled(self, w: T) -> Self {
        self.map(|z| z.scale(w))
    }
    fn sum(self, other: Self) -> Self {
        self.add(other)
    }
}

impl<T: Real> Integrand<T> for DVector<Cx<T>> {
    fn scaled(self, w: T) -> Self {
        self.map(|z| z.scale(w))
    }
    fn sum(self, other: Self) -> Self {
        self.add(other)
    }
}

/// `int_lo^hi f`. An empty window returns the zero of `f`'s value type.
pub fn integrate<T, V, F>(rule: &QuadratureRule<T>, mut f: F, lo: T, hi: T) -> V
where
    T: Real,
    V: Integrand<T>,
    F: FnMut(T) -> V,
{
    let pts = rule.mapped(lo, hi);
    if pts.is_empty() {
        return f(lo).scaled(T::zero());
    }
    let mut it = pts.into_iter();
    let (x0, w0) = it.next().expect("nonempty rule");
    it.fold(f(x0).scaled(w0), |acc, (x, w)| acc.sum(f(x).scaled(w)))
}

/// Gauss-Legendre nodes (ascending) and weights by Newton iteration on `P_n`.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<QuadratureRule<T>> {
    if n == 0 {
        return Err(DdeError::InvalidArgument("quadrature needs at least one point".into()));
    }
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = T::from_index(n);
    let tol = T::eps() * T::lit(4.0);
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let mut z = (T::pi() * (T::from_index(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= tol {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = T::lit(2.0) / ((T::one() - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = T::zero();
    }
    Ok(QuadratureRule {
        kind: QuadKind::GaussLegendre,
        abscissae: x,
        weights: w,
    })
}

fn legendre_with_derivative<T: Real>(n: usize, z: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = z;
    for k in 2..=n {
        let kf = T::from_index(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf = T::from_index(n);
    (p1, nf * (z * p1 - p0) / (z * z - T::one()))
}

/// Clenshaw-Curtis rule on the `n` extrema of `T_{n-1}` (ascending); `n = 1` is the midpoint rule.
pub fn clenshaw_curtis<T: Real>(n: usize) -> Result<QuadratureRule<T>> {
    if n == 0 {
        return Err(DdeError::InvalidArgument("quadrature needs at least one point".into()));
    }
    if n == 1 {
        return Ok(QuadratureRule {
            kind: QuadKind::ClenshawCurtis,
            abscissae: vec![T::zero()],
            weights: vec![T::lit(2.0)],
        });
    }
    let deg = n - 1;
    let df = T::from_index(deg);
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    for (k, xk) in x.iter_mut().enumerate() {
        *xk = -(T::from_index(k) * T::pi() / df).cos();
    }
    if deg.is_multiple_of(2) {
        x[deg / 2] = T::zero();
    }
    let two = T::lit(2.0);
    let ends = if deg.is_multiple_of(2) {
        T::one() / (df * df - T::one())
    } else {
        T::one() / (df * df)
    };
    w[0] = ends;
    w[deg] = ends;
    for (k, wk) in w.iter_mut().enumerate().take(deg).skip(1) {
        let theta = T::from_index(k) * T::pi() / df;
        let mut v = T::one();
        for j in 1..=((deg - 1) / 2) {
            let jf = T::from_index(j);
            v -= two * (two * jf * theta).cos() / (T::lit(4.0) * jf * jf - T::one());
        }
        if deg.is_multiple_of(2) {
            v -= (df * theta).cos() / (df * df - T::one());
        }
        *wk = two * v / df;
    }
    Ok(QuadratureRule {
        kind: QuadKind::ClenshawCurtis,
        abscissae: x,
        weights: w,
    })
}

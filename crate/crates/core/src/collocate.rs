//! Collocation solution of the initial value problem, state evolution, and a
//! method-of-steps reference integrator used as an independent oracle.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{DdeError, Result};
use crate::evolution::{assemble_u, evolution_matrix, factor_checked, restrict_history};
use crate::interp::{interp_eval_blocks, GridPair, NodeGrid};
use crate::linalg::Factored;
use crate::model::{DdeProblem, ShiftedProblem};
use crate::quad::{gauss_legendre, QuadratureRule};
use crate::scalar::{cx, Cx, Magnitude, Real};

pub type History<T> = Arc<dyn Fn(T) -> DVector<Cx<T>> + Send + Sync>;

/// Degree-`N` collocation polynomial on `[0, r_s]`, stored by its values on `{0} ∪ Ω_N⁺`.
#[derive(Debug, Clone)]
pub struct CollocationSolution<T: Real> {
    pub grid: NodeGrid<T>,
    pub nodal_values: Vec<DVector<Cx<T>>>,
}

impl<T: Real> CollocationSolution<T> {
    pub fn eval(&self, t: T) -> Result<DVector<Cx<T>>> {
        interp_eval_blocks(&self.grid, &self.nodal_values, t)
    }

    pub fn stacked(&self) -> DVector<Cx<T>> {
        let d = self.nodal_values[0].len();
        let mut out = DVector::zeros(d * self.nodal_values.len());
        for (j, v) in self.nodal_values.iter().enumerate() {
            out.rows_mut(j * d, d).copy_from(v);
        }
        out
    }
}

fn split_blocks<T: Real>(v: &DVector<Cx<T>>, d: usize) -> Vec<DVector<Cx<T>>> {
    (0..v.len() / d).map(|j| v.rows(j * d, d).into_owned()).collect()
}

/// Solves `U+ p = U- phi_M` for the collocation polynomial.
///
/// The initial-condition rows are eliminated first, so `p(0) = phi(0)` holds exactly.
pub fn collocation_solve<T: Real>(
    problem: &ShiftedProblem<T>,
    phi: impl Fn(T) -> DVector<Cx<T>>,
    grids: &GridPair<T>,
    rule: &QuadratureRule<T>,
) -> Result<CollocationSolution<T>> {
    let d = problem.dim();
    let phi_nodal = restrict_history(&grids.minus, d, phi)?;
    let (up, um) = assemble_u(problem, grids, rule)?;
    // full-matrix check keeps the singularity criterion identical to the evolution operator's
    factor_checked(&up)?;
    let n = grids.n();
    let rhs_full = &um * &phi_nodal;
    let phi0 = phi_nodal.rows(0, d).into_owned();
    let interior = up.view((d, d), (d * n, d * n)).into_owned();
    let coupling = up.view((d, 0), (d * n, d)).into_owned();
    let rhs = rhs_full.rows(d, d * n).into_owned() - coupling * &phi0;
    let rest = Factored::new(&interior).solve_vec(&rhs)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(phi0);
    values.extend(split_blocks(&rest, d));
    Ok(CollocationSolution {
        grid: grids.plus0.clone(),
        nodal_values: values,
    })
}

/// Largest collocation-equation residual `|p'(θ_i) - (G_s p)(θ_i)|` over `i = 1..N`,
/// evaluated with the assembled matrices (exact basis derivatives, same quadrature).
pub fn collocation_residual<T: Real>(
    problem: &ShiftedProblem<T>,
    sol: &CollocationSolution<T>,
    phi: impl Fn(T) -> DVector<Cx<T>>,
    grids: &GridPair<T>,
    rule: &QuadratureRule<T>,
) -> Result<T> {
    let d = problem.dim();
    let phi_nodal = restrict_history(&grids.minus, d, phi)?;
    let (up, um) = assemble_u(problem, grids, rule)?;
    let r = &up * sol.stacked() - &um * phi_nodal;
    Ok(r.rows(d, r.len() - d).iter().fold(T::zero(), |m, z| m.max(z.mag())))
}

/// `T_{M,N} phi_M`: the state at the end of the window on the history grid, stacked in `d`-blocks.
pub fn evolve_state<T: Real>(
    problem: &DdeProblem<T>,
    phi: impl Fn(T) -> DVector<Cx<T>>,
    n: usize,
    m: usize,
    rule: &QuadratureRule<T>,
) -> Result<DVector<Cx<T>>> {
    let mats = evolution_matrix(problem, n, m, rule)?;
    let phi_nodal = restrict_history(&mats.grids.minus, problem.dim(), phi)?;
    Ok(&mats.t_matrix * phi_nodal)
}

/// Method-of-steps solution on `[0, r_s]` by classical RK4 with cubic Hermite dense output.
///
/// The step divides `tau` so every multiple of `tau` is a mesh point.
#[derive(Clone)]
pub struct ReferenceSolution<T: Real> {
    pub step: T,
    pub times: Vec<T>,
    pub values: Vec<DVector<Cx<T>>>,
    pub derivs: Vec<DVector<Cx<T>>>,
    problem: ShiftedProblem<T>,
    phi: History<T>,
    cell_rule: QuadratureRule<T>,
}

impl<T: Real> std::fmt::Debug for ReferenceSolution<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReferenceSolution")
            .field("step", &self.step)
            .field("points", &self.times.len())
            .finish()
    }
}

fn hermite<T: Real>(
    t0: T,
    t1: T,
    y0: &DVector<Cx<T>>,
    y1: &DVector<Cx<T>>,
    f0: &DVector<Cx<T>>,
    f1: &DVector<Cx<T>>,
    u: T,
) -> DVector<Cx<T>> {
    let h = t1 - t0;
    let s = (u - t0) / h;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    y0.map(|z| z.scale(h00)) + f0.map(|z| z.scale(h10 * h)) + y1.map(|z| z.scale(h01)) + f1.map(|z| z.scale(h11 * h))
}

/// What is known about the solution on the step currently being taken.
enum Pending<'a, T: Real> {
    /// Start of the step: value and slope at `t_n`.
    Start {
        t0: T,
        y0: &'a DVector<Cx<T>>,
        f0: &'a DVector<Cx<T>>,
    },
    /// Step finished except for the slope at its end.
    End {
        t0: T,
        t1: T,
        y0: &'a DVector<Cx<T>>,
        f0: &'a DVector<Cx<T>>,
        y1: &'a DVector<Cx<T>>,
    },
}

struct Stepper<'a, T: Real> {
    problem: &'a ShiftedProblem<T>,
    phi: &'a History<T>,
    rule: &'a QuadratureRule<T>,
    h: T,
    times: Vec<T>,
    values: Vec<DVector<Cx<T>>>,
    derivs: Vec<DVector<Cx<T>>>,
}

impl<T: Real> Stepper<'_, T> {
    /// Solution at `u` from history or completed cells (`u <= last mesh time`).
    fn stored(&self, u: T) -> DVector<Cx<T>> {
        if u <= T::zero() {
            return (self.phi)(u);
        }
        let last = self.times.len() - 1;
        if last == 0 {
            return self.values[0].clone();
        }
        let mut k = (u / self.h).floor().to_usize().unwrap_or(0).min(last - 1);
        while k > 0 && self.times[k] > u {
            k -= 1;
        }
        while k + 1 < last && self.times[k + 1] < u {
            k += 1;
        }
        hermite(
            self.times[k],
            self.times[k + 1],
            &self.values[k],
            &self.values[k + 1],
            &self.derivs[k],
            &self.derivs[k + 1],
            u,
        )
    }

    fn pending_value(&self, pending: &Pending<'_, T>, u: T) -> DVector<Cx<T>> {
        match *pending {
            Pending::Start { t0, y0, f0 } => {
                let n = self.times.len() - 1;
                if n >= 1 {
                    // extrapolate the previous cell's cubic
                    hermite(
                        self.times[n - 1],
                        self.times[n],
                        &self.values[n - 1],
                        &self.values[n],
                        &self.derivs[n - 1],
                        &self.derivs[n],
                        u,
                    )
                } else {
                    y0 + f0.map(|z| z.scale(u - t0))
                }
            }
            Pending::End { t0, t1, y0, f0, y1 } => {
                // quadratic through (t0, y0) and (t1, y1) with slope f0 at t0
                let h = t1 - t0;
                let s = u - t0;
                let curv = (y1 - y0 - f0.map(|z| z.scale(h))).map(|z| z.unscale(h * h));
                y0 + f0.map(|z| z.scale(s)) + curv.map(|z| z.scale(s * s))
            }
        }
    }

    fn rhs(&self, t: T, y: &DVector<Cx<T>>, pending: Option<&Pending<'_, T>>) -> Result<DVector<Cx<T>>> {
        let p = self.problem;
        let tau = p.tau();
        let mut out = DVector::zeros(p.dim());
        if p.has_a() {
            out += p.a_s(t)? * y;
        }
        if p.has_b() {
            out += p.b_s(t)? * self.stored(t - tau);
        }
        if p.has_c() {
            let known = match pending {
                Some(Pending::Start { t0, .. }) | Some(Pending::End { t0, .. }) => *t0,
                None => *self.times.last().expect("mesh"),
            };
            out += self.kernel_integral(t, known, pending)?;
        }
        Ok(out)
    }

    /// `int_{t - tau}^{t} c(t, u - t) y(u) du` split at 0, at mesh points, and at `known`.
    fn kernel_integral(&self, t: T, known: T, pending: Option<&Pending<'_, T>>) -> Result<DVector<Cx<T>>> {
        let p = self.problem;
        let lo = t - p.tau();
        let mut acc = DVector::zeros(p.dim());
        let mut add = |a: T, b: T, value: &dyn Fn(T) -> DVector<Cx<T>>| -> Result<()> {
            for (u, w) in self.rule.mapped(a, b) {
                let c = p.c_s(t, u - t)?;
                acc += (c * value(u)).map(|z| z.scale(w));
            }
            Ok(())
        };
        if lo < T::zero() {
            let hist_end = T::zero().min(t);
            let panels = ((hist_end - lo) / self.h).ceil().to_usize().unwrap_or(1).max(1);
            let width = (hist_end - lo) / T::from_index(panels);
            for k in 0..panels {
                let a = lo + width * T::from_index(k);
                let b = if k + 1 == panels { hist_end } else { a + width };
                add(a, b, &|u| (self.phi)(u))?;
            }
        }
        let mut a = lo.max(T::zero());
        let stored_end = known.min(t);
        // walk the stored mesh so that every panel sits inside one Hermite cell
        let mut k = self.times.partition_point(|&x| x <= a);
        while a < stored_end {
            let b = self.times.get(k).map_or(stored_end, |&x| x.min(stored_end));
            if b > a {
                add(a, b, &|u| self.stored(u))?;
                a = b;
            }
            if k >= self.times.len() {
                break;
            }
            k += 1;
        }
        if let Some(pending) = pending {
            let a = known.max(lo);
            if t > a {
                add(a, t, &|u| self.pending_value(pending, u))?;
            }
        }
        Ok(acc)
    }
}

/// Integrates `problem` from the initial function `phi` with step at most `h` (`h <= tau/4`).
pub fn reference_solution<T: Real>(
    problem: &ShiftedProblem<T>,
    phi: impl Fn(T) -> DVector<Cx<T>> + Send + Sync + 'static,
    h: T,
) -> Result<ReferenceSolution<T>> {
    let tau = problem.tau();
    if !(h > T::zero()) || h > tau / T::lit(4.0) {
        return Err(DdeError::InvalidArgument(format!(
            "reference step must lie in (0, tau/4], got {h}"
        )));
    }
    // shave rounding so that e.g. tau / 0.025 does not round up to 41 cells
    let per_delay = (tau / h * (T::one() - T::lit(64.0) * T::eps()))
        .ceil()
        .to_usize()
        .unwrap_or(4)
        .max(4);
    let step = tau / T::from_index(per_delay);
    let rs = problem.rs();
    let phi: History<T> = Arc::new(phi);
    let cell_rule = gauss_legendre(3)?;
    let y0 = phi(T::zero());
    if y0.len() != problem.dim() {
        return Err(DdeError::LengthMismatch {
            expected: problem.dim(),
            got: y0.len(),
        });
    }
    let mut st = Stepper {
        problem,
        phi: &phi,
        rule: &cell_rule,
        h: step,
        times: vec![T::zero()],
        values: vec![y0.clone()],
        derivs: Vec::new(),
    };
    let f0 = {
        let start = Pending::Start {
            t0: T::zero(),
            y0: &y0,
            f0: &DVector::zeros(problem.dim()),
        };
        // at t = 0 only history contributes to the kernel term
        st.rhs(T::zero(), &y0, Some(&start))?
    };
    st.derivs.push(f0);

    let full_steps = (rs / step).floor().to_usize().unwrap_or(0);
    let mut carry: DVector<Cx<T>> = DVector::zeros(problem.dim());
    let mut n = 0;
    loop {
        let t0 = st.times[n];
        let hstep = if n < full_steps { step } else { rs - t0 };
        if !(hstep > step * T::lit(1e-9)) {
            break;
        }
        let t1 = if n < full_steps {
            step * T::from_index(n + 1)
        } else {
            rs
        };
        let half = hstep / T::lit(2.0);
        let y = st.values[n].clone();
        let f = st.derivs[n].clone();
        let start = Pending::Start { t0, y0: &y, f0: &f };
        let k1 = f.clone();
        let y2 = &y + k1.map(|z| z.scale(half));
        let k2 = st.rhs(t0 + half, &y2, Some(&start))?;
        let y3 = &y + k2.map(|z| z.scale(half));
        let k3 = st.rhs(t0 + half, &y3, Some(&start))?;
        let y4 = &y + k3.map(|z| z.scale(hstep));
        let k4 = st.rhs(t1, &y4, Some(&start))?;
        let sixth = hstep / T::lit(6.0);
        let incr =
            (k1 + k2.map(|z| z.scale(T::lit(2.0))) + k3.map(|z| z.scale(T::lit(2.0))) + k4).map(|z| z.scale(sixth));
        // compensated update keeps round-off from accumulating over many small steps
        let corrected = incr - &carry;
        let y_next = &y + &corrected;
        carry = (&y_next - &y) - corrected;
        let end = Pending::End {
            t0,
            t1,
            y0: &y,
            f0: &f,
            y1: &y_next,
        };
        let f_next = st.rhs(t1, &y_next, Some(&end))?;
        st.times.push(t1);
        st.values.push(y_next);
        st.derivs.push(f_next);
        n += 1;
        if n > full_steps {
            break;
        }
    }
    let Stepper {
        times, values, derivs, ..
    } = st;
    Ok(ReferenceSolution {
        step,
        times,
        values,
        derivs,
        problem: problem.clone(),
        phi,
        cell_rule,
    })
}

impl<T: Real> ReferenceSolution<T> {
    fn stepper(&self) -> Stepper<'_, T> {
        Stepper {
            problem: &self.problem,
            phi: &self.phi,
            rule: &self.cell_rule,
            h: self.step,
            times: self.times.clone(),
            values: self.values.clone(),
            derivs: self.derivs.clone(),
        }
    }

    /// Solution value at `t in [-tau, r_s]`.
    pub fn value(&self, t: T) -> DVector<Cx<T>> {
        self.stepper().stored(t)
    }

    /// `y'(t)` from the right-hand side evaluated on the stored solution (`t in (0, r_s]`).
    pub fn derivative(&self, t: T) -> Result<DVector<Cx<T>>> {
        let st = self.stepper();
        let y = st.stored(t);
        st.rhs(t, &y, None)
    }

    pub fn end_time(&self) -> T {
        *self.times.last().expect("mesh")
    }
}

/// Computable surrogates of the collocation remainder and error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderEstimate<T: Real> {
    /// `sup |y' - L_N⁺ y'|` with `y` the reference solution.
    pub rho: T,
    /// `sup |y - p_N|`.
    pub solution_error: T,
}

fn sup_norm<T: Real>(v: &DVector<Cx<T>>) -> T {
    v.iter().fold(T::zero(), |m, z| m.max(z.mag()))
}

/// Sample points on `[0, rs]` used for the sup-norm diagnostics.
pub fn dense_samples<T: Real>(rs: T, count: usize) -> Vec<T> {
    let count = count.max(2);
    (0..count)
        .map(|k| {
            if k + 1 == count {
                rs
            } else {
                rs * T::from_index(k) / T::from_index(count - 1)
            }
        })
        .collect()
}

pub fn remainder_estimate<T: Real>(
    problem: &ShiftedProblem<T>,
    phi: impl Fn(T) -> DVector<Cx<T>> + Clone + Send + Sync + 'static,
    grids: &GridPair<T>,
    rule: &QuadratureRule<T>,
    h: T,
) -> Result<RemainderEstimate<T>> {
    let reference = reference_solution(problem, phi.clone(), h)?;
    let sol = collocation_solve(problem, phi, grids, rule)?;
    remainder_against(&reference, &sol, grids)
}

/// Same diagnostics against a precomputed reference solution.
pub fn remainder_against<T: Real>(
    reference: &ReferenceSolution<T>,
    sol: &CollocationSolution<T>,
    grids: &GridPair<T>,
) -> Result<RemainderEstimate<T>> {
    let plus = &grids.plus;
    let node_derivs = plus
        .nodes()
        .iter()
        .map(|&t| reference.derivative(t))
        .collect::<Result<Vec<_>>>()?;
    let mut rho = T::zero();
    let mut err = T::zero();
    let samples = dense_samples(grids.rs, 20 * grids.n() + 201);
    for &t in samples.iter().skip(1) {
        let dy = reference.derivative(t)?;
        let interp = interp_eval_blocks(plus, &node_derivs, t)?;
        rho = rho.max(sup_norm(&(dy - interp)));
    }
    for &t in &samples {
        err = err.max(sup_norm(&(reference.value(t) - sol.eval(t)?)));
    }
    Ok(RemainderEstimate {
        rho,
        solution_error: err,
    })
}

/// Constant history `phi(theta) = value`.
pub fn constant_history<T: Real>(value: &[T]) -> impl Fn(T) -> DVector<Cx<T>> + Clone + Send + Sync + 'static {
    let v: DVector<Cx<T>> = DVector::from_iterator(value.len(), value.iter().map(|&x| cx(x)));
    move |_| v.clone()
}

/// Scalar history from a real function.
pub fn scalar_history<T: Real>(
    f: impl Fn(T) -> T + Clone + Send + Sync + 'static,
) -> impl Fn(T) -> DVector<Cx<T>> + Clone + Send + Sync + 'static {
    move |theta| DVector::from_element(1, cx(f(theta)))
}

//! Collocation matrices `U+`, `U-`, restriction/prolongation matrices `V+`, `V-`
//! and the discrete evolution operator `T = V+ (U+)^{-1} U- + V-`.
//!
//! Nodal vectors store one `d`-block per node, blocks contiguous, in grid order:
//! `{0} ∪ Ω_N⁺` ascending for the collocation side, `0 = θ_0 > ... > θ_M = -τ` for the history.

use nalgebra::DVector;

use crate::error::{DdeError, Result};
use crate::interp::{basis_deriv_row, GridPair, NodeGrid};
use crate::linalg::Factored;
use crate::model::{shift_problem, CMat, DdeProblem, ShiftedProblem};
use crate::quad::QuadratureRule;
use crate::scalar::{cx, Cx, Real};

/// `u_plus` is rejected when its reciprocal condition estimate falls below this.
pub const RCOND_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct EvolutionMatrices<T: Real> {
    pub dim: usize,
    pub grids: GridPair<T>,
    pub u_plus: CMat<T>,
    pub u_minus: CMat<T>,
    pub v_plus: CMat<T>,
    pub v_minus: CMat<T>,
    pub t_matrix: CMat<T>,
    pub n_plus: usize,
    pub m_minus: usize,
    /// 1-norm condition estimate of `u_plus`.
    pub cond_estimate: T,
}

impl<T: Real> EvolutionMatrices<T> {
    pub fn n(&self) -> usize {
        self.grids.n()
    }

    pub fn m(&self) -> usize {
        self.grids.m()
    }

    /// Whether the discretized operator is the compact one (`r_s >= tau`).
    pub fn is_compact_regime(&self) -> bool {
        self.grids.rs >= self.grids.tau
    }
}

/// Largest `j in 1..=N` with `θ⁺_j <= tau`, or 0.
pub fn index_n_plus<T: Real>(plus: &NodeGrid<T>, tau: T) -> usize {
    plus.nodes()
        .iter()
        .rposition(|&x| x - tau <= T::zero())
        .map_or(0, |j| j + 1)
}

/// Largest `j in 0..=M` with `rs + θ⁻_j >= 0`.
pub fn index_m_minus<T: Real>(minus: &NodeGrid<T>, rs: T) -> usize {
    minus.nodes().iter().rposition(|&x| rs + x >= T::zero()).unwrap_or(0)
}

fn add_scaled_identity<T: Real>(m: &mut CMat<T>, bi: usize, bj: usize, d: usize, s: T) {
    for k in 0..d {
        m[(bi * d + k, bj * d + k)] += cx(s);
    }
}

fn add_scaled_block<T: Real>(m: &mut CMat<T>, bi: usize, bj: usize, block: &CMat<T>, s: T) {
    let d = block.nrows();
    for r in 0..d {
        for c in 0..d {
            m[(bi * d + r, bj * d + c)] += block[(r, c)].scale(s);
        }
    }
}

/// Collocation matrices `(U+, U-)` of sizes `d(N+1) x d(N+1)` and `d(N+1) x d(M+1)`.
pub fn assemble_u<T: Real>(
    problem: &ShiftedProblem<T>,
    grids: &GridPair<T>,
    rule: &QuadratureRule<T>,
) -> Result<(CMat<T>, CMat<T>)> {
    let d = problem.dim();
    let tau = problem.tau();
    let n = grids.n();
    let m = grids.m();
    let plus0 = &grids.plus0;
    let minus = &grids.minus;
    let n_plus = index_n_plus(&grids.plus, tau);

    let mut up = CMat::zeros(d * (n + 1), d * (n + 1));
    let mut um = CMat::zeros(d * (n + 1), d * (m + 1));
    add_scaled_identity(&mut up, 0, 0, d, T::one());
    add_scaled_identity(&mut um, 0, 0, d, T::one());

    for i in 1..=n {
        let theta = plus0.nodes()[i];
        for (j, &dl) in basis_deriv_row(plus0, theta).iter().enumerate() {
            add_scaled_identity(&mut up, i, j, d, dl);
        }
        if problem.has_a() {
            add_scaled_block(&mut up, i, i, &problem.a_s(theta)?, -T::one());
        }
        let history_window = i <= n_plus;
        if problem.has_b() {
            let b = problem.b_s(theta)?;
            if history_window {
                for (j, &l) in minus.basis_row(theta - tau).iter().enumerate() {
                    add_scaled_block(&mut um, i, j, &b, l);
                }
            } else {
                for (j, &l) in plus0.basis_row(theta - tau).iter().enumerate() {
                    add_scaled_block(&mut up, i, j, &b, -l);
                }
            }
        }
        if problem.has_c() {
            let lo = if history_window { -theta } else { -tau };
            for (x, w) in rule.mapped(lo, T::zero()) {
                let c = problem.c_s(theta, x)?;
                for (j, &l) in plus0.basis_row(theta + x).iter().enumerate() {
                    add_scaled_block(&mut up, i, j, &c, -(w * l));
                }
            }
            if history_window {
                for (x, w) in rule.mapped(-tau, -theta) {
                    let c = problem.c_s(theta, x)?;
                    for (j, &l) in minus.basis_row(theta + x).iter().enumerate() {
                        add_scaled_block(&mut um, i, j, &c, w * l);
                    }
                }
            }
        }
    }
    Ok((up, um))
}

/// Restriction `V+` (`d(M+1) x d(N+1)`) and prolongation `V-` (`d(M+1) x d(M+1)`);
/// independent of the coefficients.
pub fn assemble_v<T: Real>(grids: &GridPair<T>, dim: usize) -> (CMat<T>, CMat<T>) {
    let d = dim;
    let n = grids.n();
    let m = grids.m();
    let rs = grids.rs;
    let m_minus = index_m_minus(&grids.minus, rs);
    let mut vp = CMat::zeros(d * (m + 1), d * (n + 1));
    let mut vm = CMat::zeros(d * (m + 1), d * (m + 1));
    for (i, &theta) in grids.minus.nodes().iter().enumerate() {
        let t = rs + theta;
        if i <= m_minus {
            for (j, &l) in grids.plus0.basis_row(t).iter().enumerate() {
                add_scaled_identity(&mut vp, i, j, d, l);
            }
        } else {
            for (j, &l) in grids.minus.basis_row(t).iter().enumerate() {
                add_scaled_identity(&mut vm, i, j, d, l);
            }
        }
    }
    (vp, vm)
}

/// Discrete evolution operator over the problem's window with `N` collocation and `M` history nodes.
pub fn evolution_matrix<T: Real>(
    problem: &DdeProblem<T>,
    n: usize,
    m: usize,
    rule: &QuadratureRule<T>,
) -> Result<EvolutionMatrices<T>> {
    let shifted = shift_problem(problem);
    let grids = GridPair::new(n, m, shifted.tau(), shifted.rs())?;
    evolution_matrix_on(&shifted, grids, rule)
}

pub fn evolution_matrix_on<T: Real>(
    problem: &ShiftedProblem<T>,
    grids: GridPair<T>,
    rule: &QuadratureRule<T>,
) -> Result<EvolutionMatrices<T>> {
    let d = problem.dim();
    let (u_plus, u_minus) = assemble_u(problem, &grids, rule)?;
    let (v_plus, v_minus) = assemble_v(&grids, d);
    let lu = factor_checked(&u_plus)?;
    let t_matrix = &v_plus * lu.solve(&u_minus)? + &v_minus;
    Ok(EvolutionMatrices {
        dim: d,
        n_plus: index_n_plus(&grids.plus, grids.tau),
        m_minus: index_m_minus(&grids.minus, grids.rs),
        grids,
        u_plus,
        u_minus,
        v_plus,
        v_minus,
        t_matrix,
        cond_estimate: lu.cond,
    })
}

pub(crate) fn factor_checked<T: Real>(u_plus: &CMat<T>) -> Result<Factored<T>> {
    let lu = Factored::new(u_plus);
    let rcond = lu.rcond();
    if !(rcond >= T::lit(RCOND_THRESHOLD)) {
        return Err(DdeError::SingularCollocation {
            rcond: rcond.to_f64_lossy(),
        });
    }
    Ok(lu)
}

/// Samples `phi` on the history grid into a stacked nodal vector.
pub fn restrict_history<T: Real>(
    minus: &NodeGrid<T>,
    dim: usize,
    phi: impl Fn(T) -> DVector<Cx<T>>,
) -> Result<DVector<Cx<T>>> {
    let mut out = DVector::zeros(dim * minus.len());
    for (j, &theta) in minus.nodes().iter().enumerate() {
        let v = phi(theta);
        if v.len() != dim {
            return Err(DdeError::LengthMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        out.rows_mut(j * dim, dim).copy_from(&v);
    }
    Ok(out)
}

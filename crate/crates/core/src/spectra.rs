//! Multipliers of the discrete evolution operator, clustering, eigenfunctions,
//! stability verdicts and monodromy operators.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DVector;

use crate::error::{DdeError, Result};
use crate::evolution::{evolution_matrix, EvolutionMatrices};
use crate::interp::{interp_eval_blocks, GridPair, NodeGrid};
use crate::linalg::eig;
use crate::model::{CMat, DdeProblem};
use crate::quad::QuadratureRule;
use crate::scalar::{Cx, Magnitude, Real};

pub const DEFAULT_ZERO_REL_TOL: f64 = 1e-10;
pub const DEFAULT_MARGIN: f64 = 1e-9;

/// `max(1e-6, sqrt(eps))`.
pub fn default_cluster_tol<T: Real>() -> T {
    T::lit(1e-6).max(T::eps().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        })
    }
}

/// Group of multipliers treated as one (possibly multiple) eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster<T: Real> {
    pub mean: Cx<T>,
    /// Algebraic multiplicity proxy.
    pub count: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult<T: Real> {
    /// Retained multipliers by descending modulus.
    pub multipliers: Vec<Cx<T>>,
    pub clusters: Vec<Cluster<T>>,
    /// Unit-norm eigenvectors, column `k` belongs to `multipliers[k]`.
    pub eigenvectors: CMat<T>,
    pub zero_threshold: T,
    pub verdict: Option<Verdict>,
}

impl<T: Real> SpectrumResult<T> {
    pub fn spectral_radius(&self) -> T {
        self.multipliers.first().map_or(T::zero(), |z| z.mag())
    }

    pub fn dominant(&self) -> Option<Cx<T>> {
        self.multipliers.first().copied()
    }

    /// Index of the cluster containing multiplier `k`.
    pub fn cluster_of(&self, k: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.members.contains(&k))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions<T: Real> {
    pub zero_rel_tol: T,
    pub cluster_tol: T,
    pub margin: T,
}

impl<T: Real> Default for SpectrumOptions<T> {
    fn default() -> Self {
        Self {
            zero_rel_tol: T::lit(DEFAULT_ZERO_REL_TOL),
            cluster_tol: default_cluster_tol(),
            margin: T::lit(DEFAULT_MARGIN),
        }
    }
}

fn by_modulus_desc<T: Real>(a: &Cx<T>, b: &Cx<T>) -> Ordering {
    b.mag()
        .partial_cmp(&a.mag())
        .unwrap_or(Ordering::Equal)
        .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
}

/// Nonzero spectrum of `t_matrix` with default clustering and verdict settings.
pub fn multipliers<T: Real>(mats: &EvolutionMatrices<T>, zero_rel_tol: T) -> Result<SpectrumResult<T>> {
    let opts = SpectrumOptions {
        zero_rel_tol,
        ..SpectrumOptions::default()
    };
    spectrum_of(&mats.t_matrix, &opts)
}

pub fn multipliers_with<T: Real>(mats: &EvolutionMatrices<T>, opts: &SpectrumOptions<T>) -> Result<SpectrumResult<T>> {
    spectrum_of(&mats.t_matrix, opts)
}

/// Eigenvalues of `t` with modulus above `zero_rel_tol` times the spectral radius.
pub fn spectrum_of<T: Real>(t: &CMat<T>, opts: &SpectrumOptions<T>) -> Result<SpectrumResult<T>> {
    if t.nrows() != t.ncols() {
        return Err(DdeError::InvalidArgument("evolution matrix is not square".into()));
    }
    let (values, vectors) = eig(t)?;
    let radius = values.iter().fold(T::zero(), |m, z| m.max(z.mag()));
    let zero_threshold = opts.zero_rel_tol * radius;
    let mut keep: Vec<usize> = (0..values.len())
        .filter(|&k| values[k].mag() > zero_threshold)
        .collect();
    keep.sort_by(|&a, &b| by_modulus_desc(&values[a], &values[b]).then(a.cmp(&b)));
    // conjugate moduli differ only by round-off; list the upper member first
    let mut i = 0;
    while i + 1 < keep.len() {
        let (z, w) = (values[keep[i]], values[keep[i + 1]]);
        if (z - w.conj()).mag() <= opts.cluster_tol * T::one().max(z.mag()) && z.im != w.im {
            if z.im < w.im {
                keep.swap(i, i + 1);
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    let multipliers: Vec<Cx<T>> = keep.iter().map(|&k| values[k]).collect();
    let mut eigenvectors = CMat::zeros(t.nrows(), keep.len());
    for (col, &k) in keep.iter().enumerate() {
        eigenvectors.set_column(col, &vectors.column(k));
    }
    let clusters = cluster(&multipliers, opts.cluster_tol)?;
    let mut result = SpectrumResult {
        multipliers,
        clusters,
        eigenvectors,
        zero_threshold,
        verdict: None,
    };
    result.verdict = stability_verdict(&result, opts.margin).ok();
    Ok(result)
}

/// Greedy clustering: each unassigned multiplier (in list order) seeds a cluster that absorbs
/// every later unassigned multiplier within `tol` of the seed in modulus and in distance.
pub fn cluster<T: Real>(mults: &[Cx<T>], tol: T) -> Result<Vec<Cluster<T>>> {
    if !(tol > T::zero()) {
        return Err(DdeError::InvalidArgument(format!(
            "cluster tolerance must be positive, got {tol}"
        )));
    }
    let mut assigned = vec![false; mults.len()];
    let mut out = Vec::new();
    for seed in 0..mults.len() {
        if assigned[seed] {
            continue;
        }
        assigned[seed] = true;
        let s = mults[seed];
        let mut members = vec![seed];
        for k in (seed + 1)..mults.len() {
            if !assigned[k] && (mults[k].mag() - s.mag()).abs() < tol && (mults[k] - s).mag() < tol {
                assigned[k] = true;
                members.push(k);
            }
        }
        let sum = members
            .iter()
            .fold(Cx::new(T::zero(), T::zero()), |acc, &k| acc + mults[k]);
        out.push(Cluster {
            mean: sum.unscale(T::from_index(members.len())),
            count: members.len(),
            members,
        });
    }
    Ok(out)
}

/// Stable when every modulus is below `1 - margin`, unstable when one exceeds `1 + margin`.
pub fn stability_verdict<T: Real>(result: &SpectrumResult<T>, margin: T) -> Result<Verdict> {
    if margin < T::zero() {
        return Err(DdeError::InvalidArgument("margin must be nonnegative".into()));
    }
    let max = result
        .multipliers
        .iter()
        .map(|z| z.mag())
        .fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.max(v))))
        .ok_or(DdeError::EmptySpectrum)?;
    Ok(if max < T::one() - margin {
        Verdict::Stable
    } else if max > T::one() + margin {
        Verdict::Unstable
    } else {
        Verdict::Marginal
    })
}

/// `||T v - mu v|| / ||v||` for every retained eigenpair.
pub fn eigen_residuals<T: Real>(mats: &EvolutionMatrices<T>, result: &SpectrumResult<T>) -> Vec<T> {
    result
        .multipliers
        .iter()
        .enumerate()
        .map(|(k, &mu)| {
            let v = result.eigenvectors.column(k).into_owned();
            let r = &mats.t_matrix * &v - v.map(|z| z * mu);
            r.norm() / v.norm()
        })
        .collect()
}

/// Function on `[-tau, 0]` represented by its values on the history grid.
#[derive(Debug, Clone)]
pub struct Eigenfunction<T: Real> {
    pub grid: NodeGrid<T>,
    pub nodal_values: Vec<DVector<Cx<T>>>,
}

impl<T: Real> Eigenfunction<T> {
    pub fn eval(&self, theta: T) -> Result<DVector<Cx<T>>> {
        interp_eval_blocks(&self.grid, &self.nodal_values, theta)
    }
}

/// Prolongs an eigenvector of `t_matrix` to a function on `[-tau, 0]`.
///
/// Scaled so the largest component at `theta = 0` equals 1, or so the largest nodal entry
/// equals 1 when the value at 0 vanishes.
pub fn eigenfunction<T: Real>(
    mats: &EvolutionMatrices<T>,
    eigvec: &DVector<Cx<T>>,
    grids: &GridPair<T>,
) -> Result<Eigenfunction<T>> {
    let d = mats.dim;
    let expected = d * grids.minus.len();
    if eigvec.len() != expected {
        return Err(DdeError::LengthMismatch {
            expected,
            got: eigvec.len(),
        });
    }
    let argmax = |v: &[Cx<T>]| {
        v.iter().enumerate().fold(
            (0, T::zero()),
            |best, (k, z)| if z.mag() > best.1 { (k, z.mag()) } else { best },
        )
    };
    let (kmax, vmax) = argmax(eigvec.as_slice());
    if vmax == T::zero() {
        return Err(DdeError::ZeroVector);
    }
    let (k0, v0) = argmax(&eigvec.as_slice()[..d]);
    let pivot = if v0 > T::lit(1e3) * T::eps() * vmax {
        eigvec[k0]
    } else {
        eigvec[kmax]
    };
    let scaled = eigvec.map(|z| z / pivot);
    let nodal_values = (0..grids.minus.len())
        .map(|j| scaled.rows(j * d, d).into_owned())
        .collect();
    Ok(Eigenfunction {
        grid: grids.minus.clone(),
        nodal_values,
    })
}

/// Discretized `U(k omega) = T(s + k omega, s)` for `omega`-periodic coefficients.
#[derive(Debug, Clone)]
pub struct Monodromy<T: Real> {
    pub omega: T,
    pub k: usize,
    pub mats: EvolutionMatrices<T>,
}

impl<T: Real> Monodromy<T> {
    pub fn window(&self) -> T {
        self.omega * T::from_index(self.k)
    }
}

/// Smallest `k >= 1` with `k omega >= tau`.
pub fn smallest_power<T: Real>(omega: T, tau: T) -> usize {
    let mut k = (tau / omega).ceil().to_usize().unwrap_or(1).max(1);
    while k > 1 && T::from_index(k - 1) * omega >= tau {
        k -= 1;
    }
    while T::from_index(k) * omega < tau {
        k += 1;
    }
    k
}

pub fn monodromy<T: Real>(
    problem: &DdeProblem<T>,
    omega: T,
    k: Option<usize>,
    n: usize,
    m: usize,
    rule: &QuadratureRule<T>,
) -> Result<Monodromy<T>> {
    if !(omega > T::zero()) {
        return Err(DdeError::InvalidArgument(format!(
            "period must be positive, got {omega}"
        )));
    }
    let k = match k {
        Some(0) => return Err(DdeError::InvalidArgument("power k must be at least 1".into())),
        Some(k) => k,
        None => smallest_power(omega, problem.tau()),
    };
    let s = problem.start();
    let window = problem.with_window(s, s + omega * T::from_index(k))?;
    let mats = evolution_matrix(&window, n, m, rule)?;
    Ok(Monodromy { omega, k, mats })
}

//! Dense complex linear algebra used by assembly and spectral extraction.

use nalgebra::linalg::{Schur, LU};
use nalgebra::{DMatrix, DVector, Dyn};

use crate::error::{DdeError, Result};
use crate::model::CMat;
use crate::scalar::{Cx, Magnitude, Real};

/// LU factorization with partial pivoting plus a 1-norm condition estimate.
pub struct Factored<T: Real> {
    lu: LU<Cx<T>, Dyn, Dyn>,
    /// Estimate of `||A||_1 ||A^{-1}||_1`; infinite when the factor is exactly singular.
    pub cond: T,
}

impl<T: Real> Factored<T> {
    pub fn new(a: &CMat<T>) -> Self {
        let lu = LU::new(a.clone());
        let cond = if lu.is_invertible() {
            let adj = LU::new(a.adjoint());
            norm1(a) * inverse_norm1_estimate(&lu, &adj, a.nrows())
        } else {
            T::max_value().unwrap_or_else(|| T::lit(f64::MAX))
        };
        Self { lu, cond }
    }

    pub fn rcond(&self) -> T {
        T::one() / self.cond
    }

    pub fn solve(&self, rhs: &CMat<T>) -> Result<CMat<T>> {
        self.lu.solve(rhs).ok_or(DdeError::SingularCollocation { rcond: 0.0 })
    }

    pub fn solve_vec(&self, rhs: &DVector<Cx<T>>) -> Result<DVector<Cx<T>>> {
        self.lu.solve(rhs).ok_or(DdeError::SingularCollocation { rcond: 0.0 })
    }
}

/// Maximum absolute column sum.
pub fn norm1<T: Real>(a: &CMat<T>) -> T {
    a.column_iter()
        .map(|c| c.iter().fold(T::zero(), |acc, z| acc + z.mag()))
        .fold(T::zero(), |m, s| if s > m { s } else { m })
}

fn vec_norm1<T: Real>(v: &DVector<Cx<T>>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.mag())
}

/// Hager-Higham estimate of `||A^{-1}||_1` using solves with `A` and `A^H`.
fn inverse_norm1_estimate<T: Real>(lu: &LU<Cx<T>, Dyn, Dyn>, adj: &LU<Cx<T>, Dyn, Dyn>, n: usize) -> T {
    if n == 0 {
        return T::zero();
    }
    let one = Cx::new(T::one(), T::zero());
    let mut x = DVector::from_element(n, one.scale(T::one() / T::from_index(n)));
    let mut est = T::zero();
    for iter in 0..5 {
        let Some(y) = lu.solve(&x) else { break };
        let ny = vec_norm1(&y);
        if iter > 0 && ny <= est {
            break;
        }
        est = ny;
        let xi = y.map(|z| {
            let r = z.mag();
            if r > T::zero() {
                z.unscale(r)
            } else {
                one
            }
        });
        let Some(z) = adj.solve(&xi) else { break };
        let (jmax, zmax) = z
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.mag()))
            .fold((0, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        let ztx = z.dotc(&x).re;
        if iter > 0 && zmax <= ztx {
            break;
        }
        x = DVector::from_element(n, Cx::new(T::zero(), T::zero()));
        x[jmax] = one;
    }
    // alternating test vector guards against the estimator stalling on special structure
    if n > 1 {
        let alt = DVector::from_fn(n, |i, _| {
            let sign = if i % 2 == 0 { T::one() } else { -T::one() };
            one.scale(sign * (T::one() + T::from_index(i) / T::from_index(n - 1)))
        });
        if let Some(y) = lu.solve(&alt) {
            let cand = T::lit(2.0) * vec_norm1(&y) / T::lit(3.0 * n as f64);
            if cand > est {
                est = cand;
            }
        }
    }
    est
}

/// Eigenvalues and unit-norm right eigenvectors of a square complex matrix.
pub fn eig<T: Real>(a: &CMat<T>) -> Result<(Vec<Cx<T>>, CMat<T>)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    if n == 1 {
        return Ok((
            vec![a[(0, 0)]],
            DMatrix::from_element(1, 1, Cx::new(T::one(), T::zero())),
        ));
    }
    let schur = Schur::try_new(a.clone(), T::eps(), 100 * n).ok_or(DdeError::EigenNoConvergence)?;
    let (q, s) = schur.unpack();
    let values: Vec<Cx<T>> = (0..n).map(|k| s[(k, k)]).collect();
    let scale = norm1(&s);
    let small = if scale > T::zero() { T::eps() * scale } else { T::eps() };
    let mut vecs = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = values[k];
        let mut x = DVector::from_element(n, Cx::new(T::zero(), T::zero()));
        x[k] = Cx::new(T::one(), T::zero());
        for i in (0..k).rev() {
            let mut acc = Cx::new(T::zero(), T::zero());
            for j in (i + 1)..=k {
                acc += s[(i, j)] * x[j];
            }
            let mut den = s[(i, i)] - lambda;
            if den.mag() < small {
                den = Cx::new(small, T::zero());
            }
            x[i] = -acc / den;
            let big = x.iter().fold(T::zero(), |m, z| m.max(z.mag()));
            if big > T::one() / T::eps() {
                x.unscale_mut(big);
            }
        }
        let mut v = &q * x;
        let nv = v.norm();
        if nv > T::zero() {
            v.unscale_mut(nv);
        }
        vecs.set_column(k, &v);
    }
    Ok((values, vecs))
}

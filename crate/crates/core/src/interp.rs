//! Interpolation grids, barycentric Lagrange evaluation and basis derivatives.

use nalgebra::DVector;

use crate::error::{DdeError, Result};
use crate::scalar::{Cx, Real};

/// Distinct, strictly monotone nodes on `[lo, hi]` with barycentric weights.
///
/// Weights are stored rescaled by a common positive factor so they stay
/// representable for large node counts; the barycentric ratio is unaffected.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid<T: Real> {
    nodes: Vec<T>,
    lo: T,
    hi: T,
    weights: Vec<T>,
}

impl<T: Real> NodeGrid<T> {
    pub fn new(nodes: Vec<T>, lo: T, hi: T) -> Result<Self> {
        if nodes.is_empty() {
            return Err(DdeError::InvalidArgument("grid needs at least one node".into()));
        }
        if !(lo <= hi) {
            return Err(DdeError::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
        }
        if nodes.iter().any(|&x| x < lo || x > hi) {
            return Err(DdeError::InvalidArgument("node outside its interval".into()));
        }
        if nodes.len() > 1 {
            let ascending = nodes[1] > nodes[0];
            for (k, w) in nodes.windows(2).enumerate() {
                if w[0] == w[1] {
                    return Err(DdeError::DuplicateNodes(k, k + 1));
                }
                if (w[1] > w[0]) != ascending {
                    return Err(DdeError::InvalidArgument("nodes must be strictly monotone".into()));
                }
            }
        }
        let scale = if hi > lo { T::lit(4.0) / (hi - lo) } else { T::one() };
        let weights = scaled_weights(&nodes, scale)?;
        Ok(Self { nodes, lo, hi, weights })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn interval(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    fn node_index(&self, t: T) -> Option<usize> {
        self.nodes.iter().position(|&x| x == t)
    }

    /// Cardinal values `(l_0(t), ..., l_n(t))`.
    pub fn basis_row(&self, t: T) -> Vec<T> {
        let n = self.nodes.len();
        if let Some(j) = self.node_index(t) {
            let mut row = vec![T::zero(); n];
            row[j] = T::one();
            return row;
        }
        let mut row: Vec<T> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w / (t - x))
            .collect();
        let denom = row.iter().fold(T::zero(), |acc, &v| acc + v);
        for v in &mut row {
            *v /= denom;
        }
        row
    }
}

fn scaled_weights<T: Real>(nodes: &[T], scale: T) -> Result<Vec<T>> {
    let n = nodes.len();
    let mut w = vec![T::one(); n];
    for j in 0..n {
        for k in 0..n {
            if k == j {
                continue;
            }
            let diff = nodes[j] - nodes[k];
            if diff == T::zero() {
                return Err(DdeError::DuplicateNodes(j.min(k), j.max(k)));
            }
            w[j] *= diff * scale;
        }
        w[j] = T::one() / w[j];
    }
    Ok(w)
}

/// Barycentric weights `w_j = 1 / prod_{k != j} (x_j - x_k)`, unscaled.
pub fn bary_weights<T: Real>(nodes: &[T]) -> Result<Vec<T>> {
    scaled_weights(nodes, T::one())
}

/// Zeros of the degree-`n` Chebyshev polynomial mapped to `(0, rs)`, ascending:
/// `x_i = rs/2 (1 - cos((2i - 1) pi / (2n)))`, `i = 1..n`.
pub fn cheb_zero_nodes<T: Real>(n: usize, rs: T) -> Result<NodeGrid<T>> {
    if n == 0 || !(rs > T::zero()) {
        return Err(DdeError::InvalidArgument(format!(
            "Chebyshev grid needs n >= 1 and rs > 0 (n = {n}, rs = {rs})"
        )));
    }
    let mut nodes = vec![T::zero(); n];
    let half = rs / T::lit(2.0);
    let denom = T::from_index(4 * n);
    // 1 - cos(2x) = 2 sin^2(x) keeps the nodes near 0 accurate; the upper half mirrors the lower.
    for i in 0..n / 2 {
        let s = (T::from_index(2 * i + 1) * T::pi() / denom).sin();
        nodes[i] = rs * s * s;
        nodes[n - 1 - i] = rs - nodes[i];
    }
    if n % 2 == 1 {
        nodes[n / 2] = half;
    }
    NodeGrid::new(nodes, T::zero(), rs)
}

/// `m + 1` Chebyshev-Lobatto points on `[-tau, 0]` in descending order `0 = x_0 > ... > x_m = -tau`.
pub fn history_nodes<T: Real>(m: usize, tau: T) -> Result<NodeGrid<T>> {
    if m == 0 || !(tau > T::zero()) {
        return Err(DdeError::InvalidArgument(format!(
            "history grid needs m >= 1 and tau > 0 (m = {m}, tau = {tau})"
        )));
    }
    let mut nodes = vec![T::zero(); m + 1];
    let denom = T::from_index(2 * m);
    for j in 0..=m / 2 {
        let s = (T::from_index(j) * T::pi() / denom).sin();
        nodes[j] = -(tau * s * s);
        nodes[m - j] = -tau - nodes[j];
    }
    nodes[0] = T::zero();
    nodes[m] = -tau;
    if m.is_multiple_of(2) {
        nodes[m / 2] = -tau / T::lit(2.0);
    }
    NodeGrid::new(nodes, -tau, T::zero())
}

/// Value of the interpolating polynomial through `(nodes[j], values[j])` at `t`.
pub fn interp_eval<T: Real>(grid: &NodeGrid<T>, values: &[Cx<T>], t: T) -> Result<Cx<T>> {
    if values.len() != grid.len() {
        return Err(DdeError::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    if let Some(j) = grid.node_index(t) {
        return Ok(values[j]);
    }
    let row = grid.basis_row(t);
    Ok(row
        .iter()
        .zip(values)
        .fold(Cx::new(T::zero(), T::zero()), |acc, (&l, v)| acc + v.scale(l)))
}

/// Block version of [`interp_eval`] for `d`-dimensional nodal values.
pub fn interp_eval_blocks<T: Real>(grid: &NodeGrid<T>, values: &[DVector<Cx<T>>], t: T) -> Result<DVector<Cx<T>>> {
    if values.len() != grid.len() {
        return Err(DdeError::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    if let Some(j) = grid.node_index(t) {
        return Ok(values[j].clone());
    }
    let d = values[0].len();
    let row = grid.basis_row(t);
    let mut out = DVector::zeros(d);
    for (&l, v) in row.iter().zip(values) {
        out.axpy(Cx::new(l, T::zero()), v, Cx::new(T::one(), T::zero()));
    }
    Ok(out)
}

/// Derivatives of the cardinal polynomials at `t`: `(l_0'(t), ..., l_n'(t))`.
///
/// At a node the off-diagonal entries are `(w_j / w_i) / (x_i - x_j)` and the diagonal is the
/// negated row sum.
pub fn basis_deriv_row<T: Real>(grid: &NodeGrid<T>, t: T) -> Vec<T> {
    let x = grid.nodes();
    let w = grid.weights();
    let n = x.len();
    let mut row = vec![T::zero(); n];
    if n == 1 {
        return row;
    }
    if let Some(i) = grid.node_index(t) {
        let mut diag = T::zero();
        for j in 0..n {
            if j != i {
                row[j] = (w[j] / w[i]) / (x[i] - x[j]);
                diag -= row[j];
            }
        }
        row[i] = diag;
        return row;
    }
    // l_j'(t) = l_j(t) (q - 1/(t - x_j)),  q = sum_k w_k/(t - x_k)^2 / sum_k w_k/(t - x_k)
    let mut s = T::zero();
    let mut s2 = T::zero();
    for (&xk, &wk) in x.iter().zip(w) {
        let r = wk / (t - xk);
        s += r;
        s2 += r / (t - xk);
    }
    let q = s2 / s;
    let mut sum = T::zero();
    for j in 0..n {
        let lj = (w[j] / (t - x[j])) / s;
        row[j] = lj * (q - T::one() / (t - x[j]));
        sum += row[j];
    }
    // push the round-off onto the largest entry so the row sums to zero
    let jmax = (0..n)
        .max_by(|&a, &b| row[a].abs().partial_cmp(&row[b].abs()).unwrap())
        .unwrap_or(0);
    row[jmax] -= sum;
    row
}

/// Lower estimate of the Lebesgue constant: `max_t sum_j |l_j(t)|` over `samples` equispaced points.
pub fn lebesgue_constant<T: Real>(grid: &NodeGrid<T>, samples: usize) -> Result<T> {
    if samples < 10 * grid.len() {
        return Err(DdeError::InvalidArgument(format!(
            "need at least {} samples, got {samples}",
            10 * grid.len()
        )));
    }
    let (lo, hi) = grid.interval();
    let step = (hi - lo) / T::from_index(samples - 1);
    let mut best = T::zero();
    for k in 0..samples {
        let t = if k + 1 == samples {
            hi
        } else {
            lo + step * T::from_index(k)
        };
        let sum = grid.basis_row(t).iter().fold(T::zero(), |acc, &l| acc + l.abs());
        if sum > best {
            best = sum;
        }
    }
    Ok(best)
}

/// History grid on `[-tau, 0]` and collocation grids on `(0, rs)` / `[0, rs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPair<T: Real> {
    pub minus: NodeGrid<T>,
    pub plus: NodeGrid<T>,
    /// `{0}` followed by the collocation nodes.
    pub plus0: NodeGrid<T>,
    pub tau: T,
    pub rs: T,
}

impl<T: Real> GridPair<T> {
    pub fn new(n: usize, m: usize, tau: T, rs: T) -> Result<Self> {
        let minus = history_nodes(m, tau)?;
        let plus = cheb_zero_nodes(n, rs)?;
        let mut with_zero = Vec::with_capacity(n + 1);
        with_zero.push(T::zero());
        with_zero.extend_from_slice(plus.nodes());
        let plus0 = NodeGrid::new(with_zero, T::zero(), rs)?;
        Ok(Self {
            minus,
            plus,
            plus0,
            tau,
            rs,
        })
    }

    /// Collocation degree `N`.
    pub fn n(&self) -> usize {
        self.plus.len()
    }

    /// History degree `M`.
    pub fn m(&self) -> usize {
        self.minus.len() - 1
    }
}

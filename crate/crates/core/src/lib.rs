//! Spectra of linear nonautonomous delay differential equations by pseudospectral
//! collocation of the evolution operator.
//!
//! The equation
//!
//! ```text
//! x'(t) = a(t) x(t) + b(t) x(t - tau) + int_{-tau}^0 c(t, theta) x(t + theta) dtheta
//! ```
//!
//! is discretized on `[s, r]` by collocating a degree-`N` polynomial at Chebyshev zeros and
//! representing states on `M + 1` Chebyshev-Lobatto points of `[-tau, 0]`. The resulting matrix
//! approximates the evolution operator `T(r, s)`; its nonzero eigenvalues approximate the
//! multipliers (Floquet multipliers for periodic coefficients over one period).
//!
//! Every routine is generic over the real scalar (`f32` or `f64`); the `*64` aliases fix `f64`.

// `!(x > y)` is used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collocate;
pub mod error;
pub mod evolution;
pub mod interp;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod scalar;
pub mod spectra;

pub use collocate::{
    collocation_solve, evolve_state, reference_solution, remainder_estimate, CollocationSolution, ReferenceSolution,
    RemainderEstimate,
};
pub use error::{DdeError, Result};
pub use evolution::{assemble_u, assemble_v, evolution_matrix, index_m_minus, index_n_plus, EvolutionMatrices};
pub use interp::{GridPair, NodeGrid};
pub use model::{parse_coefficient, shift_problem, CMat, CoefficientExpr, DdeProblem, ExprMatrix, ShiftedProblem};
pub use quad::{integrate, QuadKind, QuadratureRule};
pub use scalar::{Cx, Real};
pub use spectra::{
    cluster, eigenfunction, monodromy, multipliers, stability_verdict, Cluster, Eigenfunction, Monodromy,
    SpectrumOptions, SpectrumResult, Verdict,
};

pub type DdeProblem64 = DdeProblem<f64>;
pub type DdeProblem32 = DdeProblem<f32>;
pub type ShiftedProblem64 = ShiftedProblem<f64>;
pub type EvolutionMatrices64 = EvolutionMatrices<f64>;
pub type EvolutionMatrices32 = EvolutionMatrices<f32>;
pub type SpectrumResult64 = SpectrumResult<f64>;
pub type GridPair64 = GridPair<f64>;
pub type NodeGrid64 = NodeGrid<f64>;
pub type QuadratureRule64 = QuadratureRule<f64>;
pub type Complex64 = Cx<f64>;

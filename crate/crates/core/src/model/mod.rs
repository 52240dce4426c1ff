//! Problem definition, time shift and coefficient expressions.

pub mod expr;
mod problem;

pub use expr::{parse_coefficient, CoefficientExpr, Expr};
pub use problem::{shift_problem, CMat, DdeProblem, ExprMatrix, KernelCoefficient, PointCoefficient, ShiftedProblem};

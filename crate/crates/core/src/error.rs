use thiserror::Error;

/// Errors raised by the discretization library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DdeError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("`theta` is not allowed here (position {pos}); only the distributed kernel may depend on theta")]
    ThetaForbidden { pos: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coefficient evaluation failed: {0}")]
    Coefficient(String),

    #[error("duplicate interpolation nodes at indices {0} and {1}")]
    DuplicateNodes(usize, usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("collocation matrix is numerically singular (reciprocal condition {rcond:.3e}); increase N")]
    SingularCollocation { rcond: f64 },

    #[error("eigensolver did not converge")]
    EigenNoConvergence,

    #[error("no nonzero multipliers were resolved")]
    EmptySpectrum,

    #[error("eigenvector is zero")]
    ZeroVector,
}

pub type Result<T> = std::result::Result<T, DdeError>;

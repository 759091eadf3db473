use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inconclusive rate {q} is below the feasible minimum {min}")]
    InfeasibleRate { q: f64, min: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("confidence undefined: no conclusive outcomes")]
    UndefinedConfidence,

    #[error("malformed problem: {0}")]
    MalformedProblem(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("certificate rejected: {0}")]
    Certificate(String),

    #[error("primal program infeasible for physical statistics")]
    InternalInconsistency,

    #[error("operation requires a {expected} bound")]
    WrongKind { expected: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

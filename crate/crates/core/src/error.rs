use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid example set: {0}")]
    InvalidExampleSet(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The chosen column is (numerically) perfectly correlated with the
    /// example weights, so the prescribed step is infinite.
    #[error("perfect separation: |r| = {r} leaves no finite step")]
    PerfectSeparation { r: f64 },

    #[error("zero loss on the requested example set")]
    ZeroLoss,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("linear program: {0}")]
    Lp(String),

    #[error("newton iteration did not converge after {iterations} iterations (gradient {gradient:e})")]
    NoConvergence { iterations: usize, gradient: f64 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("oracle refused: {0}")]
    OracleRefused(String),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

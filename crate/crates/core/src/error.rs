use thiserror::Error;

/// Errors raised by the solvers, trackers, bandits and environments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Sherman-Morrison denominator `1 + x'A^{-1}x` collapsed.
    #[error("numerically degenerate rank-1 update (denominator {denom:e})")]
    Degenerate { denom: f64 },

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("matrix is not symmetric (max asymmetry {asym:e})")]
    NotSymmetric { asym: f64 },

    /// The design matrix has not reached full rank yet.
    #[error("solution not available yet: {0}")]
    NotReady(&'static str),

    #[error("operation requires a non-empty data buffer")]
    EmptyBuffer,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("line {line}: {msg}")]
    Schema { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

use thiserror::Error;

/// Errors raised by the optimizers and their building blocks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("category index {index} out of range for {size} categories")]
    CategoryOutOfRange { index: usize, size: usize },

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("covariance matrix is not positive definite (eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("categorical probability {value:e} at block {block}, entry {entry} must be positive")]
    NonPositiveProbability {
        block: usize,
        entry: usize,
        value: f64,
    },

    #[error("probability {0} is outside [0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),
}

pub type Result<T> = std::result::Result<T, Error>;

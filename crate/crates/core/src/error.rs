use thiserror::Error;

/// Errors raised by the optimizers, benchmark constructors and statistics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

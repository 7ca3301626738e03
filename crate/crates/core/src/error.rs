use thiserror::Error;

/// Errors produced by index computation, detection and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curve has a non-finite value at position {position}")]
    InvalidCurve { position: usize },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("reference curve is constant, indices are undefined")]
    DegenerateReference,

    #[error("direction has {got} components but the data has {expected} dimensions")]
    InvalidDirection { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

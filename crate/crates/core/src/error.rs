use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("discount factor must satisfy 0 <= gamma < 1, got {0}")]
    InvalidGamma(f64),

    #[error("index {index} out of range for {what} of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("numerical breakdown: {0}")]
    NonFinite(String),

    #[error("replay buffer is empty")]
    EmptyBuffer,

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

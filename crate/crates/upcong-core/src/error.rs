use thiserror::Error;

/// Errors raised by the exact and modular computations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("coefficient at {at} has denominator divisible by {p}")]
    NonIntegral { at: String, p: u64 },
    #[error("precision {have} is below the required {need}: {what}")]
    InsufficientPrecision { have: usize, need: usize, what: String },
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

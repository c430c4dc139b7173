use thiserror::Error;

/// Errors produced by the construction and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("base must be prime, got {0}")]
    NotPrime(u32),

    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),

    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    #[error("unsupported expansion: {0}")]
    UnsupportedExpansion(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("scale guard exceeded: {0}")]
    ScaleGuard(String),

    #[error("empty point set")]
    EmptyPointSet,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

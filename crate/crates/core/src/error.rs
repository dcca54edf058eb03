use thiserror::Error;

/// Every fallible operation in the crate returns this error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Arguments are individually valid but inconsistent with each other.
    #[error("usage error: {0}")]
    Usage(String),
    /// The requested problem is too large for the memory/time caps.
    #[error("size error: {0}")]
    Size(String),
    /// Quadrature or factorization failed to reach its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}

use thiserror::Error;

/// Errors raised by the library. Every variant carries a human-readable reason.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The input lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The operation is not available for inputs of this size.
    #[error("capability error: {0}")]
    Capability(String),
    /// An intermediate integer does not fit the supported width.
    #[error("overflow: {0}")]
    Overflow(String),
    /// Malformed textual input (element strings, cache lines).
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

use thiserror::Error;

/// Errors surfaced by the physical-layer building blocks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported rate ratio: {0}")]
    UnsupportedRatio(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("not available: {0}")]
    NotAvailable(String),
    #[error("malformed header: {0}")]
    Header(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

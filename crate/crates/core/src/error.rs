use thiserror::Error;

/// Errors raised by solvers, generators and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// The input is valid but outside what the requested routine supports
    /// (unsupported graph class, oracle size limit, ...).
    #[error("unsupported: {0}")]
    Capability(String),
    /// A numerical routine failed to converge or produced an inconsistent state.
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn capability<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Capability(msg.into()))
}

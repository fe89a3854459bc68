use thiserror::Error;

/// Errors produced by the construction and verification routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A computation would exceed a configured size guard.
    #[error("resource limit exceeded: {what} requires {required}, limit is {limit}")]
    ResourceLimit { what: String, required: u128, limit: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

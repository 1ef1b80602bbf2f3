//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An index or time is outside the valid range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A numeric computation produced a non-finite value or failed to converge.
    #[error("numeric failure at step {step}: {message}")]
    Numeric { step: usize, message: String },

    /// A requested computation exceeds the configured resource budget.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// No threshold in the grid met the excitation requirement.
    #[error("excitation certification failed: {0}")]
    CertificationFailure(String),

    /// An operation was invoked outside its declared contract.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Configuration file is malformed or fails validation.
    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants map onto distinct failure classes so that callers (the CLI
/// in particular) can translate them into stable exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A cube or box does not lie inside the unit domain, or grids disagree.
    #[error("domain error: {0}")]
    Domain(String),
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A structural invariant was violated (non-positive weight, broken
    /// sparse family, failed pointwise certificate, ...).
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    /// The input does not satisfy the precondition of a diagnostic.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// An operator or diagnostic name that is not known.
    #[error("unknown name: {0}")]
    Unknown(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub fn violation(msg: impl Into<String>) -> Error {
    Error::InvariantViolation(msg.into())
}

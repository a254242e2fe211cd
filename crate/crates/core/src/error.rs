use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the domain of an operation (negative argument, bad weight, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// Malformed tables or files: missing entries, bad indices, wrong shapes.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("signature mismatch: {0}")]
    Signature(String),

    #[error("unassigned free variable `{0}`")]
    UnassignedVariable(String),

    #[error("raw tuple count {count} exceeds cap {cap}")]
    CapExceeded { count: u128, cap: usize },

    #[error("formula is not {p}-linear: {reason}")]
    NotLinear { p: u32, reason: String },

    /// An exact rational answer was requested for a quantity that is irrational.
    #[error("inexact: {0}")]
    Inexact(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn structural<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Structural(msg.into()))
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid edge label {label} (graph has {max} labels)")]
    InvalidLabel { label: usize, max: usize },
    #[error("grid mismatch between densities")]
    GridMismatch,
    #[error("graph is not a tree")]
    NotATree,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("horizon {horizon} exceeds schedule length {len}")]
    HorizonTooLong { horizon: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

use thiserror::Error;

/// Errors produced by state construction, bound evaluation, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("state file error: {0}")]
    Format(String),

    #[error("unusable witness: {0}")]
    UnusableWitness(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

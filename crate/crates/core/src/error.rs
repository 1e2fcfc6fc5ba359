use thiserror::Error;

use crate::numeric::NumericError;

/// Errors raised by the evaluation layers above the numeric core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("pole at {0}")]
    Pole(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the harness before or outside per-row evaluation.
///
/// Numerical failures inside a study row never surface here; they are recorded on the
/// row as flags so that one difficult point cannot abort a whole sweep.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] qseries_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serialize(String),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

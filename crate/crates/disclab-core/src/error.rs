use thiserror::Error;

/// Errors produced by the computational kernel.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument failed its precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numeric argument fell outside its admissible range.
    #[error("out of range: {0}")]
    Range(String),

    /// A point file could not be ingested; names the offending record.
    #[error("ingestion error at {path}:{line}: {reason}")]
    Ingestion {
        path: String,
        line: usize,
        reason: String,
    },

    /// A piecewise-linear construction is geometrically infeasible.
    #[error("construction error ({side}): {reason}")]
    Construction { side: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn construction(side: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Construction {
            side: side.into(),
            reason: reason.into(),
        }
    }
}

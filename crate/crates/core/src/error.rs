use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Caller supplied an argument outside the documented domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A numerical routine did not reach its tolerance.
    #[error("numerical failure: {message} (error estimate {estimate:e})")]
    Numeric { message: String, estimate: f64 },

    /// An internal invariant was violated.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, estimate: f64) -> Self {
        Error::Numeric {
            message: msg.into(),
            estimate,
        }
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

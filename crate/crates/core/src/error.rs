//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// Vector/matrix dimensions do not line up.
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    Dimension {
        op: &'static str,
        expected: usize,
        got: usize,
    },

    /// The input data cannot support the requested computation.
    #[error("invalid data for {op}: {reason}")]
    InvalidData { op: &'static str, reason: String },

    /// Training produced a non-finite loss; carries the state at failure.
    #[error("numeric failure at epoch {epoch}, batch {batch}: loss = {loss}")]
    NumericFailure {
        epoch: usize,
        batch: usize,
        loss: f64,
    },

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CoreError {
    pub fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        CoreError::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub fn invalid_data(op: &'static str, reason: impl Into<String>) -> Self {
        CoreError::InvalidData {
            op,
            reason: reason.into(),
        }
    }
}

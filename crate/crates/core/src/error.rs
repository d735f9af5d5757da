//! Error type shared by user-supplied callbacks.

use thiserror::Error;

use crate::matrix::MatrixError;
use crate::vector::VectorError;

/// Failure reported by a callback (right-hand side, Jacobian, operator,
/// preconditioner, or nonlinear-system function).
///
/// A recoverable failure asks the caller to retry with different inputs, for
/// example a smaller step; an unrecoverable one aborts the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CallbackError {
    #[error("recoverable failure: {0}")]
    Recoverable(String),
    #[error("unrecoverable failure: {0}")]
    Unrecoverable(String),
}

impl CallbackError {
    pub fn is_recoverable(&self) -> bool {
        matches!(self, CallbackError::Recoverable(_))
    }
}

impl From<VectorError> for CallbackError {
    fn from(e: VectorError) -> Self {
        CallbackError::Unrecoverable(e.to_string())
    }
}

impl From<MatrixError> for CallbackError {
    fn from(e: MatrixError) -> Self {
        CallbackError::Unrecoverable(e.to_string())
    }
}

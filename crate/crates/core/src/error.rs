//! Error type shared across the library.

use thiserror::Error;

/// Errors reported by calibration, regression, and metric routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    /// An argument violated a documented precondition (range, sign,
    /// finiteness, ...). The message names the offending value.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A vector or matrix had a different length than the receiver expects.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A training configuration that cannot produce a model (zero epochs,
    /// non-positive learning rate, ...).
    #[error("invalid training config: {0}")]
    InvalidConfig(String),

    /// An operation that needs at least one element received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A width- or coverage-style aggregate was asked to consume an interval
    /// with an infinite endpoint.
    #[error("unbounded interval present in input")]
    UnboundedInterval,

    /// Malformed text input (model files, record CSV). Lines are 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl CoreError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CoreError::InvalidArgument(msg.into())
    }
}

use thiserror::Error;

/// Errors raised by the physics layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MazerError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("degenerate threshold: {what} vanishes at k = {k}")]
    DegenerateThreshold { what: &'static str, k: f64 },

    #[error("outside the validity domain: {0}")]
    OutOfValidity(String),

    #[error("numerical degeneracy: {what} (condition number {condition:.3e})")]
    NumericalDegeneracy { what: String, condition: f64 },

    #[error("invalid wave-packet spec: {0}")]
    InvalidSpec(String),

    #[error("propagation unstable at step {step}: norm drift {drift:.3e}")]
    Stability { step: usize, drift: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, MazerError>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> MazerError {
    MazerError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}

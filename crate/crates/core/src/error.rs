use thiserror::Error;

use crate::certificate::Certificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {point:?} is outside the domain: {reason}")]
    OutsideDomain { point: Vec<f64>, reason: String },

    #[error("{what} did not converge after {iterations} iterations (best value {best})")]
    NotConverged {
        what: String,
        iterations: usize,
        best: f64,
        best_point: Vec<f64>,
    },

    #[error("evaluation produced a non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("certification failed: {0}")]
    CertificationFailed(Box<Certificate>),

    #[error("stage {stage}: {reason}")]
    Stage { stage: usize, reason: String },

    #[error("not serializable: {0}")]
    NotSerializable(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn stage(stage: usize, reason: impl Into<String>) -> Self {
        Error::Stage {
            stage,
            reason: reason.into(),
        }
    }
}

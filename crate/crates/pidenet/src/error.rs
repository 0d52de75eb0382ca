use thiserror::Error;

/// Error type shared by the network calculus, the model layer and the
/// simulation kernels.
#[derive(Debug, Error)]
pub enum PidenetError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model construction failed: {0}")]
    ModelConstruction(String),

    #[error("numeric failure at step {step}: {detail}")]
    NumericFailure { step: usize, detail: String },

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error("realization selection failed after {attempts} attempts (best R = {best_r:.6e})")]
    SelectionFailure { attempts: usize, best_r: f64 },
}

impl PidenetError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        PidenetError::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, PidenetError>;

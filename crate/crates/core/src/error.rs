use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical blow-up at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },

    #[error("adaptive integrator did not reach t = {target} within {max_steps} steps (stopped at t = {reached})")]
    ConvergenceFailure {
        target: f64,
        reached: f64,
        max_steps: usize,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

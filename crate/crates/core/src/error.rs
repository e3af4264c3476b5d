use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("budget exceeded: {what} needs an estimated {estimate} entries (limit {limit})")]
    Budget {
        what: &'static str,
        estimate: u128,
        limit: u128,
    },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("step size {dt} violates guard: {reason}")]
    StepSize { dt: f64, reason: String },

    #[error("trajectory blew up at tau = {tau}: |v|_h0 = {norm}")]
    BlowUp { tau: f64, norm: f64 },

    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    #[error("resonance table does not match the model: {0}")]
    TableMismatch(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

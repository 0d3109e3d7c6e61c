use thiserror::Error;

/// Errors raised by the lab's operators and experiment runners.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("signal support [{lo}, {hi}) is not contained in the window [{window_lo}, {window_hi})")]
    SupportOutsideWindow {
        lo: i64,
        hi: i64,
        window_lo: i64,
        window_hi: i64,
    },

    #[error("collection is not sparse: {0}")]
    NotSparse(String),

    #[error("mesh step {given} does not resolve the phase; need a step of at most {required}")]
    UnderResolved { given: f64, required: f64 },

    #[error("power iteration did not converge after {iterations} iterations (last relative change {change:e})")]
    NotConverged { iterations: usize, change: f64 },

    #[error("empty selection: {0}")]
    Empty(String),

    #[error("sparse form vanishes while the pairing is {numerator}")]
    DegenerateForm { numerator: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidParameter(msg.into())
}

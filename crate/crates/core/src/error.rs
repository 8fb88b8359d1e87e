use thiserror::Error;

/// Errors produced anywhere in the decoupling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("force magnitude {magnitude} N at sample {index} exceeds capacity {capacity} N")]
    CapacityExceeded {
        index: usize,
        magnitude: f64,
        capacity: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("ambiguous component assignment: {0}")]
    Assignment(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(format!("{what} at sample {i}"))),
        None => Ok(()),
    }
}

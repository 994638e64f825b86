use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on a configuration value failed; `field` names the offending input.
    #[error("invalid `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),
    #[error("spectrum outside the resolved annulus at {count} frequencies (first: {first:?})")]
    Unresolved { count: usize, first: Vec<[i64; 2]> },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { field: field.into(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

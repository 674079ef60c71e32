//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Tensor shapes incompatible with the requested operation.
    #[error("dimension error in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    /// An API contract was violated (wrong call sequence, mismatched state).
    #[error("contract error: {0}")]
    Contract(String),

    /// A parameter value is outside its legal range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Input data could not be ingested.
    #[error("ingestion error{}: {detail}", match .line { Some(n) => format!(" at line {n}"), None => String::new() })]
    Ingestion { line: Option<usize>, detail: String },

    /// A serialized artifact (checkpoint, n-best list, model file) is malformed.
    #[error("format error{}: {detail}", match .line { Some(n) => format!(" at line {n}"), None => String::new() })]
    Format { line: Option<usize>, detail: String },

    /// A downstream stage failed while running a multi-step pipeline.
    #[error("pipeline error: {0}")]
    Pipeline(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn format(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Format { line, detail: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

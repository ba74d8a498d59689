use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("cannot parse config: {0}")]
    Parse(String),

    #[error("invalid config: {0}")]
    Invalid(String),

    #[error("method {method} does not apply to problem {problem}")]
    UnknownMethod { method: String, problem: String },

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

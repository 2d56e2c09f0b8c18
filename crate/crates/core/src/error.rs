use crate::scalar::{self, Scalar};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed textual input, with a 1-based location.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// Structurally invalid value (bad rational, cuts < 2, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A stage/height/iteration cap was hit before the requested tolerance.
    #[error("resource limit: {msg}{}", achieved.as_ref().map(|a| format!(" (achieved unresolved mass {})", scalar::format(a))).unwrap_or_default())]
    Resource { msg: String, achieved: Option<Scalar> },

    /// A checked hypothesis of a theorem-level builder failed.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource { msg: msg.into(), achieved: None }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by simulation, graph, training, and compilation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A size limit was exceeded (qubit counts, enumeration bounds).
    #[error("capacity exceeded: {what} is {requested}, maximum is {max}")]
    Capacity {
        what: &'static str,
        requested: usize,
        max: usize,
    },

    /// Inputs violate a structural precondition (arity, index range, length
    /// mismatch, invalid probability, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A text file did not conform to its format.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A computed quantity became NaN or infinite.
    #[error("numeric failure: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

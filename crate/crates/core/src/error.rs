//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("wavefunctions live on different grids")]
    GridMismatch,

    #[error("representation mismatch: expected {expected}, found {found}")]
    RepresentationMismatch { expected: String, found: String },

    #[error("band [{a}, {r}] contains no lattice mode on this grid")]
    EmptyBand { a: f64, r: f64 },

    #[error("non-finite amplitudes at t = {time}: {context}")]
    NonFinite { context: String, time: f64 },

    #[error("not certifiable: {0}")]
    NotCertifiable(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

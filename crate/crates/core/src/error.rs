use thiserror::Error;

use crate::linalg::CMatrix;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid factor shape: {0}")]
    InvalidShape(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("channel profile has no clusters")]
    EmptyProfile,

    #[error("channel has zero energy")]
    ZeroEnergy,

    #[error("identifiability violated (C1: {c1}, C2: {c2})")]
    NotIdentifiable { c1: bool, c2: bool },

    /// A SALSA term failed after `completed` terms had been fitted; the
    /// partial estimate holds the sum of those terms.
    #[error("term {term} failed: {source}")]
    TermFailed {
        term: usize,
        completed: usize,
        partial: Box<CMatrix>,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidShape(_) => "invalid_shape",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Numerical(_) => "numerical",
            Error::EmptyProfile => "empty_profile",
            Error::ZeroEnergy => "zero_energy",
            Error::NotIdentifiable { .. } => "not_identifiable",
            Error::TermFailed { .. } => "term_failed",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}

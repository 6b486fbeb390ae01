use thiserror::Error;

/// Errors raised by the moment engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("missing moment for label-word [{0}]")]
    MissingMoment(String),
    #[error("word is not normalized: adjacent letters share site {0}")]
    NotNormalized(u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("ill-conditioned solve: {0}")]
    IllConditioned(String),
}

impl Error {
    /// Input errors are the caller's fault; the rest arise while evaluating.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::InvalidArgument(_) | Error::DimensionMismatch(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::MissingMoment(_) => "missing_moment",
            Error::NotNormalized(_) => "not_normalized",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::IllConditioned(_) => "ill_conditioned",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Domain,
    Resource,
    Parse,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("{value} is not prime{}", .factor.as_ref().map(|f| format!(" (divisible by {f})")).unwrap_or_default())]
    NotPrime { value: String, factor: Option<String> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode error: {0}")]
    Mode(String),

    #[error("undefined form: {0}")]
    UndefinedForm(String),

    #[error("irrational result: prime index {index} would carry multiplicity {multiplicity}")]
    Irrational { index: u64, multiplicity: String },

    #[error("underflow: {0}")]
    Underflow(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("conversion exceeded work ceiling of {ceiling} steps; partial factorization {partial:?}, unfactored cofactor {cofactor}")]
    ConversionTimeout {
        ceiling: u64,
        partial: Vec<(String, u32)>,
        cofactor: String,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. } => ErrorClass::Parse,
            Error::Resource(_) | Error::ConversionTimeout { .. } => ErrorClass::Resource,
            _ => ErrorClass::Domain,
        }
    }

    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

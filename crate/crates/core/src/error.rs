use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric failure: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },
    #[error("not transverse: {0}")]
    NotTransverse(String),
    #[error("not a group element: {0}")]
    NotInGroup(String),
    #[error("invalid flag: {0}")]
    InvalidFlag(String),
    #[error("unsupported: {0}")]
    Capability(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("sampler exhausted after {0} attempts")]
    Exhausted(usize),
}

impl Error {
    pub fn numeric(message: impl Into<String>, residual: f64) -> Self {
        Error::Numeric { message: message.into(), residual }
    }

    pub fn is_capability(&self) -> bool {
        matches!(self, Error::Capability(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("concept class is empty")]
    EmptyClass,

    #[error("invalid concept class: {0}")]
    InvalidClass(String),

    #[error("invalid cluster family: {0}")]
    InvalidFamily(String),

    #[error("point {point} is outside a domain of size {size}")]
    PointOutOfRange { point: usize, size: usize },

    #[error("domain mismatch: expected size {expected}, found {found}")]
    DomainMismatch { expected: usize, found: usize },

    #[error("work limit exceeded in {what}: limit {limit}")]
    WorkLimitExceeded { what: &'static str, limit: u64 },

    /// Canonical witness construction produced an empty cluster at `index`
    /// (0-based), so the carvers shatter nothing there.
    #[error("canonical witness is empty at index {index}")]
    EmptyWitness { index: usize },

    #[error("no concept in the class is consistent with the sample")]
    NoConsistentHypothesis,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("moduli {first} (congruence #{first_index}) and {second} (congruence #{second_index}) are not coprime")]
    NonCoprimeModuli {
        first_index: usize,
        second_index: usize,
        first: BigInt,
        second: BigInt,
    },

    #[error("bound exceeded: {0}")]
    BoundExceeded(String),

    #[error("range of {requested} values exceeds the sieve memory budget of {budget} values; split the range into smaller segments")]
    RangeTooLarge { requested: u64, budget: u64 },

    #[error("cutoff w = {w} too small: the gap set needs {required} covering primes in (h_k, w] but only {available} exist")]
    InsufficientCutoff {
        w: u64,
        required: usize,
        available: usize,
    },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidInput,
    Bound,
    Resource,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::NonCoprimeModuli { .. } | Error::Format(_) => {
                ErrorKind::InvalidInput
            }
            Error::BoundExceeded(_) => ErrorKind::Bound,
            Error::RangeTooLarge { .. }
            | Error::InsufficientCutoff { .. }
            | Error::ResourceLimit(_) => ErrorKind::Resource,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

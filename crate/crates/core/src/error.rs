use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid network instance: {0}")]
    InvalidNetwork(String),

    #[error("length mismatch: expected {expected} {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("decoding order is not a permutation of 0..{0}")]
    InvalidOrder(usize),

    #[error("covariance matrix rejected: {0}")]
    InvalidCovariance(String),

    #[error("{what} supports at most {limit} users, got {got}")]
    TooManyUsers {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("scheme `{0}` is not supported by this operation")]
    UnsupportedScheme(&'static str),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

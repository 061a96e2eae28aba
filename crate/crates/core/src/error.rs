use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no optimal Golomb ruler of order {order} in the built-in table (supported orders: {min}..={max})")]
    UnsupportedOrder { order: usize, min: usize, max: usize },

    #[error("invalid ruler {marks:?}: {reason}")]
    InvalidRuler { marks: Vec<u32>, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid code parameters: {0}")]
    InvalidParams(String),

    #[error("length mismatch: expected {expected} {what}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("position {position} out of range for code length {len}")]
    OutOfRange { position: usize, len: usize },

    #[error("crossover probability {p} is at or above the Shannon limit {limit} for rate {rate}")]
    AboveLimit { p: f64, limit: f64, rate: f64 },

    #[error("malformed input: {0}")]
    Format(String),
}

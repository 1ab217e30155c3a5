use thiserror::Error;

/// Errors produced by the analysis and learning routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("variable index {index} out of range for n = {n}")]
    InvalidIndex { index: usize, n: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("size limit exceeded: {what} = {value} > {limit}")]
    SizeLimit {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("function is constant")]
    ConstantFunction,

    #[error("no nonzero coefficient found at any bias and level (precondition violated?)")]
    NoWitness,

    #[error("empty sample")]
    EmptySample,

    #[error("no coefficient above threshold on any oracle or level")]
    NoCoefficientFound,

    #[error("restricted draw budget of {0} attempts exhausted")]
    BudgetExhausted(u64),

    #[error("oracle {0} ran out of recorded examples")]
    OracleExhausted(usize),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

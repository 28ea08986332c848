use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SdgError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid scoring vector: {0}")]
    InvalidScoring(String),

    #[error("invalid outcome: missing agents {missing:?}, duplicated agents {duplicated:?}, out-of-range agents {out_of_range:?}")]
    InvalidOutcome {
        missing: Vec<usize>,
        duplicated: Vec<usize>,
        out_of_range: Vec<usize>,
    },

    #[error("invalid coalition: {0}")]
    InvalidCoalition(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("refused: {what} is {actual}, above the limit of {limit}")]
    LimitExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid reduction input: {0}")]
    InvalidReduction(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = SdgError> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-normalizable family: {0}")]
    NonNormalizable(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("moments undefined: {0}")]
    UndefinedMoments(String),

    #[error("uniform bound unavailable: {0}")]
    InvalidBound(String),

    #[error("monotonicity condition of the Δg lemma fails at k = {k}")]
    LemmaConditionFailed { k: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("first moments differ: target mean {target} vs sum mean {sum}")]
    MomentMismatch { target: f64, sum: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("instance too large for exact enumeration: {trials} free trials give more than {limit} outcomes")]
    TooLarge { trials: usize, limit: u64 },

    #[error("unavailable: {0}")]
    Unavailable(String),

    #[error("negative binomial cannot be fitted: variance {var} does not exceed mean {mean}")]
    NbUnfittable { mean: f64, var: f64 },

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

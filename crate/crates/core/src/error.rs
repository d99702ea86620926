use thiserror::Error;

use crate::mdp::RewardKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("wrong reward kind: expected {expected}, found {found}")]
    WrongRewardKind { expected: &'static str, found: RewardKind },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("reward compensation requires gamma > 0 (got {0})")]
    Compensation(f64),

    #[error("state map mismatch: {0}")]
    StateMapMismatch(String),

    #[error("{what} = {value} is out of range; achievable interval is [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("{what}: {count} exceeds the configured cap of {cap}; reduce the model to desk scale")]
    CapExceeded {
        what: &'static str,
        count: u128,
        cap: u128,
    },

    #[error("negative variance {value} at state {state}")]
    NegativeVariance { state: usize, value: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("empty support: {0}")]
    EmptySupport(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

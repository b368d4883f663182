use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid gamma spec `{name}`: mean and std must be positive and finite (mu={mu}, sigma={sigma})")]
    InvalidSpec { name: String, mu: f64, sigma: f64 },

    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite state or action: dynamics diverged")]
    NonFinite,

    #[error("episode diverged at step {step}")]
    EpisodeDiverged { step: usize },

    #[error("every rollout diverged; no valid trajectory to weight")]
    NoValidRollout,

    #[error("matrix is not positive definite even with jitter {jitter:e}")]
    IllConditioned { jitter: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("observation set is empty")]
    EmptyData,

    #[error("objective failed at every point of the initial design")]
    AllEvaluationsFailed,
}

pub type Result<T> = core::result::Result<T, Error>;

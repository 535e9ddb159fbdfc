use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate distribution: zero variance")]
    DegenerateDistribution,

    #[error("insufficient cumulant order: need {needed}, have {have}")]
    InsufficientOrder { needed: usize, have: usize },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("unknown family tag: {0}")]
    UnknownFamily(String),

    #[error("cumulants are not standardized: {0}")]
    NotStandardized(String),

    #[error("standardization is irrational for odd order {order}; use the floating-point path")]
    IrrationalStandardization { order: usize },

    #[error("cf tail too heavy; increase n or tmax (tail estimate {tail:e})")]
    CfTailTooHeavy { tail: f64 },

    #[error("powering an interpolated cf to n = {n} > 32 amplifies interpolation error; pass an override to force it")]
    InterpolatedPowerRefused { n: u32 },

    #[error("quantile formula inapplicable: {0}")]
    QuantileInapplicable(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid highest weight: {0}")]
    InvalidWeight(String),

    #[error("representation {0} is not unitary")]
    NotUnitary(String),

    #[error("basis dimension exceeds the cap of {cap} patterns")]
    DimensionCap { cap: usize },

    #[error("odd element has all coefficients zero")]
    ZeroOddElement,

    #[error("coupling c = {c} is not below the critical value c0 = {c0}")]
    SupercriticalCoupling { c: f64, c0: f64 },

    #[error("invalid chain parameters: {0}")]
    InvalidConfig(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("zero denominator in {0}")]
    ZeroDenominator(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// A formula produced a value that cannot occur for a valid input,
    /// such as a negative radicand on a valid target pattern.
    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

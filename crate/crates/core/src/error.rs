use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("observation {index} has negative time {time}")]
    NegativeTime { index: usize, time: f64 },

    #[error("observation {index} has a non-finite time")]
    NonFiniteTime { index: usize },

    #[error("endpoint {tau0} is not above observed time {time}")]
    EndpointNotAbove { time: f64, tau0: f64 },

    #[error("evaluation point {t} lies beyond the largest observation {max}")]
    PointBeyondData { t: f64, max: f64 },

    /// The second difference `F(y²τ) − 2F(yτ) + F(τ)` vanished (or was not finite).
    #[error("degenerate denominator in the extrapolation ratio")]
    DegenerateDenominator,

    #[error("quadrature did not converge on [{lo}, {hi}] (estimated error {error:e})")]
    QuadratureFailure { lo: f64, hi: f64, error: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("line {line}: {reason}")]
    BadRow { line: u64, reason: String },

    #[error("group `{0}` has no observations")]
    EmptyGroup(String),

    #[error("bad config value for `{key}`: {reason}")]
    BadConfig { key: String, reason: String },

    #[error("group `{group}`: {source}")]
    InGroup {
        group: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn bad_config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::BadConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input (as opposed to a failure of
    /// the numerical machinery).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::DegenerateDenominator | Error::QuadratureFailure { .. } => false,
            Error::InGroup { source, .. } => source.is_validation(),
            Error::Io(_) | Error::Json(_) => false,
            _ => true,
        }
    }
}

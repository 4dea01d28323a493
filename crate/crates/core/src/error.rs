use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no observation exceeds the threshold {threshold}")]
    NoExceedances { threshold: f64 },

    #[error("log-excess sum is zero; tail index is undefined")]
    DegenerateLogs,

    #[error("tail index must be positive and finite, got {0}")]
    InvalidAlpha(f64),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("weighted exceedance count is not positive")]
    ZeroDenominator,

    #[error("at least 2 bootstrap replicates are required, got {0}")]
    TooFewReplicates(usize),

    #[error("exceedance ratio must be positive, got {0}")]
    InvalidRatio(f64),

    #[error("{discarded} of {total} bootstrap replicates were degenerate; threshold is too high")]
    TooManyDiscarded { discarded: usize, total: usize },

    #[error("{}: line {line} (row {row}), column `{column}`: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        row: u64,
        column: String,
        message: String,
    },

    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("optimizer did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("data has zero variance")]
    DegenerateData,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::NoExceedances { .. } => "NoExceedances",
            Error::DegenerateLogs => "DegenerateLogs",
            Error::InvalidAlpha(_) => "InvalidAlpha",
            Error::InvalidParams(_) => "InvalidParams",
            Error::ZeroDenominator => "ZeroDenominator",
            Error::TooFewReplicates(_) => "TooFewReplicates",
            Error::InvalidRatio(_) => "InvalidRatio",
            Error::TooManyDiscarded { .. } => "TooManyDiscarded",
            Error::Parse { .. } => "ParseError",
            Error::TooShort { .. } => "TooShort",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DegenerateData => "DegenerateData",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
            Error::Config(_) => "Config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants are grouped by where they originate: input data, the linear
/// model, the simulation engine, and plain I/O.
#[derive(Debug, Error)]
pub enum Error {
    // data
    #[error("non-finite value in {context}")]
    NonFiniteInput { context: String },
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: String,
    },
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("only {remaining} complete rows remain after dropping missing values; at least {required} are needed")]
    EmptyAfterDrop { remaining: usize, required: usize },
    #[error("parse error at data row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("invalid transform `{0}`")]
    InvalidTransform(String),
    #[error("empty input: {0}")]
    EmptyInput(String),

    // model
    #[error("design matrix is rank deficient (column {column} is a linear combination of earlier columns)")]
    RankDeficient { column: usize },
    #[error("too few rows: n = {n} must exceed k + 1 = {}", .k + 1)]
    TooFewRows { n: usize, k: usize },
    #[error("observation {index} has leverage 1: the design without that row is singular")]
    LeverageOne { index: usize },
    #[error("residual variance vanishes when observation {index} is left out (perfect fit)")]
    ZeroResidualVariance { index: usize },
    #[error("the first n - 1 observations have zero variance")]
    ZeroVariance,

    // simulation
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("simulated draw {draw} produced a degenerate (zero-variance) fit")]
    SimulationDegenerate { draw: u64 },
    #[error(
        "not enough simulated samples to bracket the quantile of order {order} (nsim = {nsim})"
    )]
    InsufficientSamples { order: f64, nsim: usize },
    #[error(
        "null distribution was tabulated for design {expected}, but the model uses design {actual}"
    )]
    FingerprintMismatch { expected: String, actual: String },

    // io
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front-end:
    /// 2 for data errors, 3 for model errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFiniteInput { .. }
            | Error::DimensionMismatch { .. }
            | Error::MissingColumn(_)
            | Error::EmptyAfterDrop { .. }
            | Error::Parse { .. }
            | Error::InvalidTransform(_)
            | Error::EmptyInput(_)
            | Error::Io { .. }
            | Error::Csv(_) => 2,
            Error::RankDeficient { .. }
            | Error::TooFewRows { .. }
            | Error::LeverageOne { .. }
            | Error::ZeroResidualVariance { .. }
            | Error::ZeroVariance => 3,
            Error::InvalidConfig(_)
            | Error::SimulationDegenerate { .. }
            | Error::InsufficientSamples { .. }
            | Error::FingerprintMismatch { .. }
            | Error::Json(_) => 1,
        }
    }
}

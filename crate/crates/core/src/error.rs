//! Crate-wide error type.

use crate::matrix::MatrixGameSolution;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid distribution at {location}: {reason}")]
    InvalidDistribution { location: String, reason: String },

    #[error("invalid payoff: non-finite entry at ({row}, {col})")]
    InvalidPayoff { row: usize, col: usize },

    /// The matrix-game solver ran out of pivots. Carries the best solution
    /// found so far together with its certified exploitability.
    #[error("matrix solver exceeded its iteration budget (best exploitability {exploitability:.3e})")]
    SolverBudget {
        best: Box<MatrixGameSolution>,
        exploitability: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("at stage h={h}, state s={s}: {source}")]
    Stage {
        h: usize,
        s: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("not a turn-based game")]
    NotTurnBased,

    #[error("insufficient data for split: need at least {required} episodes, got {got}")]
    InsufficientData { required: usize, got: usize },

    #[error("empty dataset requested (n = 0)")]
    EmptyDataset,

    #[error("{path}:{line}: {reason}")]
    DatasetFormat {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}, column {column}: {reason}")]
    Json {
        path: String,
        line: usize,
        column: usize,
        reason: String,
    },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn json(path: &std::path::Path, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.display().to_string(),
            line: source.line(),
            column: source.column(),
            reason: source.to_string(),
        }
    }
}

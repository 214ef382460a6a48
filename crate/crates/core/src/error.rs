use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("non-positive weight {weight} on edge ({i}, {j})")]
    NonPositiveWeight { i: usize, j: usize, weight: f64 },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("index {index} out of range for {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("eigensolver did not converge")]
    ConvergenceFailure,

    #[error("unknown vertex set is empty, nothing to interpolate")]
    EmptyUnknownSet,

    #[error("known vertex set is empty")]
    EmptyKnownSet,

    #[error("smallest eigenvalue {0} of the unknown-set block is negative")]
    NegativeEigenvalue(f64),

    #[error("no basis vectors below cutoff {0}")]
    NoBasisVectors(f64),

    #[error("sampled band-limited basis is rank deficient (rank {rank} < {k})")]
    RankDeficient { rank: usize, k: usize },

    #[error("regularized system is numerically singular")]
    SingularSystem,

    #[error("iteration diverged after {iterations} steps (norm {norm:.3e})")]
    DivergenceDetected { iterations: usize, norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("rating {rating} at line {line} outside scale [{min}, {max}]")]
    OutOfScaleRating { line: usize, rating: f64, min: f64, max: f64 },

    #[error("user {0} has no known ratings")]
    ColdStartUser(usize),

    #[error("need at least {needed} rating entries, got {got}")]
    TooFewEntries { needed: usize, got: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("config error: {0}")]
    Config(String),

    #[error("fold {fold}, method {method}: {source}")]
    Experiment {
        fold: usize,
        method: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}

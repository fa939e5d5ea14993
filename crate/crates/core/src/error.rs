use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The target diagonal cannot be reproduced by any combination of the
    /// measured outcomes within tolerance.
    #[error(
        "subspace support test not representable by these outcomes (residual {residual:.3e} > tolerance {tol:.3e})"
    )]
    OutsideFov { residual: f64, tol: f64 },

    #[error("decision observable not positive at level {level} (a = {value:.3e})")]
    Positivity { level: usize, value: f64 },

    /// Requested working dimension exceeds the rank of the measured outcomes.
    #[error("field of view of {requested} levels exceeds measurement rank {rank}")]
    FovRank { requested: usize, rank: usize },

    #[error("measurement set {set}: {source}")]
    InSet {
        set: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Strips any per-set annotation.
    pub fn root(&self) -> &Error {
        match self {
            Error::InSet { source, .. } => source.root(),
            other => other,
        }
    }
}

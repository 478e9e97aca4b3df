use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("block too short: block {block} has {rows} rows but {cols} columns are required")]
    BlockTooShort {
        block: usize,
        rows: usize,
        cols: usize,
    },

    #[error("input is not upper triangular: {0}")]
    NotTriangular(String),

    #[error("Gram matrix not numerically positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("rank deficiency: column {column} has zero norm after orthogonalization")]
    RankDeficient { column: usize },

    #[error("matrix column count too large for fast memory: W = {w} but n(n+1)/2 = {triangle}")]
    FastMemoryTooSmall { w: f64, triangle: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid reduction tree: {0}")]
    InvalidTree(String),

    #[error("grid/blocking mismatch: {0}")]
    Grid(String),

    #[error("executor error: {0}")]
    Executor(String),

    #[error("no feasible configuration: {0}")]
    NoFeasibleConfig(String),

    #[error("no cost model for {0}")]
    NoModel(String),

    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

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

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// True for failures caused by the numerics of the input rather than by
    /// configuration or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. } | Error::RankDeficient { .. }
        )
    }
}

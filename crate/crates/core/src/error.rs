use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("proximal cone derivative requested at a nonsmooth point λ*={lambda_star:?}, μ={mu}")]
    NonsmoothPoint { lambda_star: [f64; 3], mu: f64 },

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("scene validation failed: {0}")]
    Scene(String),

    #[error("unsupported collision pair {0} / {1}")]
    UnsupportedPair(&'static str, &'static str),

    #[error("constraint references unknown subsystem {0}")]
    UnknownSubsystem(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line search direction is not a descent direction (φ'(0) = {0})")]
    NotDescent(f64),

    #[error("factorization is stale: built for β={built}, requested β={requested}")]
    StaleFactorization { built: f64, requested: f64 },

    #[error("solver aborted: {0}")]
    SolverAbort(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

use std::path::PathBuf;

use thiserror::Error;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// One violated geometric hypothesis, named after the configuration rule it breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometryViolation {
    pub rule: &'static str,
    pub message: String,
}

impl std::fmt::Display for GeometryViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.rule, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("region ({a}, {b}) contains no interior node of the grid")]
    EmptyRegion { a: f64, b: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight is singular at t = {t} (endpoints of the time interval are excluded)")]
    SingularTime { t: f64 },

    #[error("geometry violates {} hypothesis(es): {}", .0.len(), join(.0))]
    Geometry(Vec<GeometryViolation>),

    #[error("fixed point is not contracting: ratio {ratio:.3e} after {iterations} iterations")]
    NonContraction { ratio: f64, iterations: usize },

    #[error("fixed point reached the iteration cap {iterations} with relative residual {residual:.3e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("conjugate gradient stagnated after {iterations} iterations at relative residual {residual:.3e}")]
    CgStagnation { iterations: usize, residual: f64 },

    #[error("state is inconsistent with the controls (relative mismatch {mismatch:.3e})")]
    InconsistentState { mismatch: f64 },

    #[error("{0}")]
    Config(#[from] crate::experiment::ConfigError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn join(v: &[GeometryViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

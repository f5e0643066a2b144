use thiserror::Error;

use crate::solver::SolveStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("channel model: {0}")]
    Channel(String),

    #[error("matrix property violated: {0}")]
    Matrix(String),

    #[error("degenerate MMSE denominator ({0:e}) for {1}")]
    DegenerateMmse(f64, String),

    #[error("rate allocation violates the {layer} cap: {allocated} > {cap}")]
    CapViolation {
        layer: &'static str,
        allocated: f64,
        cap: f64,
    },

    #[error("conic solver returned {status:?} at outer iteration {iteration}")]
    Solver { status: SolveStatus, iteration: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

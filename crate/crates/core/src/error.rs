use std::io;

use thiserror::Error;

/// Errors produced by the solvers, operators and file formats in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fields live on different grids ({0} vs {1})")]
    GridMismatch(String, String),

    #[error("operation requires a {expected}D field, got {got}D")]
    Dimension { expected: usize, got: usize },

    #[error("field must have zero mean (|mean| = {0:e})")]
    NotMeanZero(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the zero mode k = 0 is not allowed here")]
    ZeroMode,

    #[error("input is not band-limited enough to avoid aliasing: {0}")]
    Aliasing(String),

    #[error("fixed-point iteration does not contract (factor {factor:.3} at iteration {iteration})")]
    NonContraction { iteration: usize, factor: f64 },

    #[error("fixed-point iteration did not reach tolerance in {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("solution blew up after t = {last_good_time}: {reason}")]
    BlowUp { last_good_time: f64, reason: String },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

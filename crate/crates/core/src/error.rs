use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the AMG library.
#[derive(Debug, Error)]
pub enum AmgError {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),

    #[error("matrix must be square, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("{path}:{line}: {detail}")]
    MatrixMarket {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e} exceeds {tolerance:e})")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },

    #[error("C/F splitting invalid: F point {row} has strong connections but no strong C neighbor")]
    SplittingInvariant { row: usize },

    #[error("coarsest-level factorization is singular")]
    SingularCoarse,

    #[error("Krylov breakdown at iteration {iteration}: {detail}")]
    Breakdown { iteration: usize, detail: String },

    #[error("drop schedule has {got} tolerances but hierarchy has {expected} levels")]
    ScheduleLength { expected: usize, got: usize },

    #[error("cannot restore level {level}: new tolerance {new} exceeds current {current}")]
    RestoreTolerance { level: usize, new: f64, current: f64 },
}

pub type Result<T> = std::result::Result<T, AmgError>;

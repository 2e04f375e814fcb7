use thiserror::Error;

/// Errors produced by the simulation and estimation kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Fock index {index} exceeds the supported maximum {max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("truncation tail mass {tail:e} exceeds the bound {bound:e} at n_max = {n_max}")]
    Truncation { tail: f64, bound: f64, n_max: usize },

    #[error("matrix is not symmetric (max |A - A^T| = {0:e})")]
    NotSymmetric(f64),

    #[error("invalid response matrix: {0}")]
    InvalidResponse(String),

    #[error("series evaluation failed: {0}")]
    Series(String),

    #[error(
        "outcome space with {tuples} tuples for {detectors} detectors is beyond the supported size"
    )]
    Intractable { tuples: usize, detectors: usize },

    #[error("at least {required} events are needed, got {got}")]
    InsufficientEvents { required: u64, got: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("fit did not converge after {iterations} iterations (last step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("quadrature did not converge: difference {difference:e} between orders exceeds {tolerance:e}")]
    Quadrature { difference: f64, tolerance: f64 },

    #[error("heralding outcome {0} has zero probability")]
    ZeroHeraldingProbability(usize),

    #[error("state has no nonnegative P function: {0}")]
    NonClassical(String),

    #[error("curves are defined on different setting grids: {0}")]
    GridMismatch(String),

    #[error("scan contains no settings")]
    EmptyScan,
}

pub type Result<T> = std::result::Result<T, Error>;

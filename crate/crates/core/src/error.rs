use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("regularization matrix is rank deficient (numerical rank {rank} < {rows} rows)")]
    RankDeficient { rank: usize, rows: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("symmetric eigendecomposition failed to converge")]
    EigenFailure,

    #[error("secular equation did not converge within {0} iterations (tolerance too tight?)")]
    SecularNoConvergence(usize),

    #[error("attainment assumption does not hold: l1 = {l1:e}, l2 = {l2:e} (need l2 < l1 when k < n)")]
    AssumptionViolated { l1: f64, l2: f64 },

    #[error(
        "objective forms disagree at alpha = {alpha}: quadratic {quadratic:e} vs fractional {fractional:e}"
    )]
    InconsistentObjective { alpha: f64, quadratic: f64, fractional: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

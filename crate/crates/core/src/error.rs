use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The Liouvillian kernel is not one-dimensional or the factorization broke down.
    /// Perturb the parameters or raise the truncation.
    #[error("singular steady-state solve: {0}")]
    SingularSolve(String),

    /// A density-matrix invariant failed after the solve; usually the truncation is too small.
    #[error("density-matrix invariant violated: {0}")]
    InvariantViolation(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("series did not converge after {terms} terms")]
    NonConvergence { terms: usize },

    #[error("ambiguous kernel: {count} eigenvalues within {tol:e} of zero")]
    AmbiguousKernel { count: usize, tol: f64 },

    #[error("diffusion matrix is indefinite (eigenvalue {eigenvalue:e})")]
    IndefiniteDiffusion { eigenvalue: f64 },

    #[error("trajectory diverged at t = {t} (|X| = {norm:e})")]
    Divergence { t: f64, norm: f64 },

    #[error("ensemble failed: {failed} of {total} trajectories failed ({first})")]
    EnsembleFailure {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("sweep specification error: {0}")]
    Spec(String),

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("sweep aborted: {failed} of {total} points failed")]
    SweepFailed { failed: usize, total: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in sweep output rows.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidTruncation(_) => "invalid_truncation",
            Error::InvalidParams(_) => "invalid_params",
            Error::InvalidState(_) => "invalid_state",
            Error::SingularSolve(_) => "singular_solve",
            Error::InvariantViolation(_) => "invariant_violation",
            Error::StepSizeUnderflow { .. } => "step_size_underflow",
            Error::NonConvergence { .. } => "non_convergence",
            Error::AmbiguousKernel { .. } => "ambiguous_kernel",
            Error::IndefiniteDiffusion { .. } => "indefinite_diffusion",
            Error::Divergence { .. } => "divergence",
            Error::EnsembleFailure { .. } => "ensemble_failure",
            Error::Spec(_) => "spec",
            Error::Config { .. } => "config",
            Error::SweepFailed { .. } => "sweep_failed",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
        }
    }
}

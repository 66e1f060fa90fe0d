use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The grid does not contain the whole support of a regularization.
    #[error("grid [{x_min}, {x_max}] does not cover [{needed_min}, {needed_max}]")]
    DomainCoverage {
        x_min: f64,
        x_max: f64,
        needed_min: f64,
        needed_max: f64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("principal coefficient is negative ({value:e}) at node {index}")]
    InvalidCoefficient { index: usize, value: f64 },

    #[error("time step {dt:e} violates the stability guard (CFL number {cfl:.6} > 1)")]
    StabilityGuard { dt: f64, cfl: f64 },

    #[error("solution diverged (non-finite value) at step {step}")]
    Divergence { step: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

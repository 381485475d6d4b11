use crate::environment::ScenarioError;
use crate::policy::HyperParamError;
use crate::preference::MatrixError;
use crate::runner::RunnerError;

/// Crate-wide error, wrapping the per-module error types.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    HyperParam(#[from] HyperParamError),
    #[error(transparent)]
    Runner(#[from] RunnerError),
}

impl Error {
    /// True when the error stems from invalid user input rather than a
    /// runtime failure (I/O, internal invariant breakage).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Matrix(_) | Error::HyperParam(_) => true,
            Error::Scenario(e) => e.is_validation(),
            Error::Runner(e) => e.is_validation(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

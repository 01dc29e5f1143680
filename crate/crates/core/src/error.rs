use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("series did not converge after {terms} terms (a={a}, b={b}, z={z})")]
    NonConvergence { a: f64, b: f64, z: f64, terms: usize },

    #[error("series for (a={a}, b={b}, z={z}) lost too many digits to cancellation")]
    Cancellation { a: f64, b: f64, z: f64 },

    #[error("quadrature failed to reach tolerance {tol:e} (estimated error {err:e})")]
    QuadratureFailure { tol: f64, err: f64 },

    #[error("no sign change found: {0}")]
    BracketFailure(String),

    #[error("exact zero pivot in Sturm count at shift {shift}")]
    SingularPivot { shift: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("minimization hit the bracket boundary at {at}")]
    MinimizationFailure { at: f64 },

    #[error("constrained solve is ill-conditioned (residual {residual:e})")]
    IllConditioned { residual: f64 },

    #[error("Newton iteration diverged after {iterations} iterations")]
    NewtonDivergence { iterations: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

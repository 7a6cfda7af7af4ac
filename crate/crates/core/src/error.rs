use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{solver} did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("conjugate gradient detected an indefinite operator at iteration {iteration} (p^T A p = {curvature:.3e})")]
    Indefinite { iteration: usize, curvature: f64 },

    #[error("inner solve for block {block} failed: {source}")]
    InnerSolve {
        block: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("Newton/active-set loop did not converge in {iterations} iterations (residual {residual:.3e})")]
    NewtonNotConverged {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("singular matrix in dense factorization")]
    Singular,

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

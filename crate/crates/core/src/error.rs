use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("inadmissible profile: {0}")]
    Inadmissible(String),

    #[error("T1 is singular at x = {x}: lower layer thickness {thickness:e} is below the touch tolerance")]
    Collapse { x: f64, thickness: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("element {element} has non-positive Jacobian {det:e}")]
    DegenerateElement { element: usize, det: f64 },

    #[error("conjugate gradients did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("negative curvature {curvature:e} at CG iteration {iteration}; system is not positive definite")]
    NegativeCurvature { iteration: usize, curvature: f64 },

    #[error("diagnostic unavailable: {0}")]
    Diagnostic(String),

    #[error("config: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

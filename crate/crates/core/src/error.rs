use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The level set changes sign more than once along a segment.
    #[error("interface crosses segment ({x0}, {y0})-({x1}, {y1}) more than once")]
    MultipleCrossings { x0: f64, y0: f64, x1: f64, y1: f64 },

    #[error("degenerate cut: {0}")]
    DegenerateCut(String),

    #[error("mesh too coarse to resolve the interface at edge {edge}")]
    MeshTooCoarse {
        edge: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("singular local IFE system on element {element} (pivot {pivot:e})")]
    SingularLocalSystem { element: usize, pivot: f64 },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("time step {step} failed")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("study failed on mesh N_s = {n_side}")]
    StudyFailed {
        n_side: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

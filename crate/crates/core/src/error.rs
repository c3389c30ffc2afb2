use thiserror::Error;

/// Errors raised while building elements, meshes and linear systems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("element construction failed for {element}: {reason}")]
    ElementConstruction { element: String, reason: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("mesh is not oriented: {0}")]
    NotOriented(String),

    #[error("forest is not 2:1 balanced: {0}")]
    Unbalanced(String),

    #[error("constraint error: {0}")]
    Constraint(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

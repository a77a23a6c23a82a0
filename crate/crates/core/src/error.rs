use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("geometry error at node {node}: {reason}")]
    Geometry { node: usize, reason: String },

    #[error("shape construction failed: {0}")]
    Construction(String),

    #[error("hypersurface is not strictly mean convex (min H = {min_h:.6e})")]
    NotMeanConvex { min_h: f64 },

    #[error("flow failed at t = {t:.6e}, node {node}: {reason}")]
    Flow { t: f64, node: usize, reason: String },

    #[error("diagnostic error: {0}")]
    Diagnostic(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

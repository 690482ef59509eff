use thiserror::Error;

/// Errors raised by geometry queries, potentials, sensors and the run drivers.
#[derive(Debug, Error)]
pub enum NavError {
    #[error("collision query: point is inside or on the boundary of component {index}")]
    CollisionQuery { index: usize },

    #[error("point is outside the free space")]
    OutsideFreeSpace,

    #[error("projection did not converge (residual {residual:e})")]
    ProjectionDiverged { residual: f64 },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported query: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameters infeasible: {0} consecutive rejections")]
    Infeasible(usize),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NavError>;

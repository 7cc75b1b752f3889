use thiserror::Error;

/// Error type shared by all solver modules.
#[derive(Debug, Error)]
pub enum MhsError {
    /// Invalid parameters, grids, or boundary data.
    #[error("config error: {0}")]
    Config(String),

    /// Geometry violation (orientation, singular Jacobian, bad boundary id).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Characteristic tracing failure (vanishing field, step budget, tangency).
    #[error("transport error: {0}")]
    Transport(String),

    /// Linear-algebra failure (singular or ill-conditioned system).
    #[error("linear solve error: {0}")]
    Linear(String),

    /// Iterative solver did not reach the requested residual.
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    /// Fixed-point iteration lost contraction.
    #[error("non-contraction detected: {0}")]
    NonContraction(String),

    /// Degenerate pressure condition (nondegeneracy integral below threshold).
    #[error("degenerate data: {0}")]
    Degeneracy(String),
}

pub type MhsResult<T> = Result<T, MhsError>;

//! Error type shared by all solver and harness layers.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid field: {0}")]
    Field(String),

    #[error("invalid acquisition setup: {0}")]
    Setup(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Iterative linear solve stopped at the iteration cap.
    #[error(
        "solver did not converge: relative residual {residual:.3e} after {iterations} iterations"
    )]
    NoConvergence { residual: f64, iterations: usize },

    /// Explicit time stepping asked to run with an unstable step.
    #[error("CFL violation: dt = {dt:.3e} exceeds the stable limit {required:.3e}")]
    Cfl { dt: f64, required: f64 },

    #[error("operator budget exceeded: {nodes} support nodes > {budget}")]
    OperatorBudget { nodes: usize, budget: usize },

    /// Fixed-point reconstruction residual grew for several consecutive steps.
    #[error("reconstruction diverged at iteration {iteration}; recent residuals {recent:?}")]
    Diverged { iteration: usize, recent: Vec<f64> },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

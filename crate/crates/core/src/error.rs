use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid material data: {0}")]
    Material(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("linear solver failed: {msg} (iterations: {iters}, last residual: {residual:.3e})")]
    LinearSolver {
        msg: String,
        iters: usize,
        residual: f64,
    },

    #[error("Newton iteration did not converge after {iters} iterations (last residual {residual:.3e})")]
    NewtonDiverged { iters: usize, residual: f64 },

    #[error("staggered iteration did not converge at step {step} after {iters} iterations; residual history tail: {tail:?}")]
    StaggeredDiverged {
        step: usize,
        iters: usize,
        tail: Vec<f64>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a special function or operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Non-finite input or an unusable numerical result.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    /// The requested path does not cover these coefficients.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A successive-approximation term exceeded its analytic bound.
    #[error("series term {term} exceeds its analytic bound ({value:.3e} > {bound:.3e})")]
    BoundViolation { term: usize, value: f64, bound: f64 },

    #[error("simulation diverged at step {step}")]
    Divergence { step: usize },

    #[error("no sign change of the effort difference on [{lo}, {hi}]")]
    NotFound { lo: f64, hi: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

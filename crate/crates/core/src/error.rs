use thiserror::Error;

use crate::grid::SpaceTag;

/// Errors raised by the library.
///
/// Usage errors are violations of a documented precondition that the caller
/// can fix; numerical errors carry enough of the solver state to diagnose the
/// failing configuration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expected a {expected:?} field, got {found:?}")]
    TagMismatch { expected: SpaceTag, found: SpaceTag },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("contract violation: {what} (magnitude {magnitude:.3e})")]
    Contract { what: String, magnitude: f64 },

    #[error("wavenumber {k1:+.4}{k2:+.4}i outside the grid band (limit {limit:.4})")]
    Band { k1: f64, k2: f64, limit: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("scattering failed at {} of {} nodes", failed.len(), total)]
    PartialScattering {
        failed: Vec<(f64, f64)>,
        total: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

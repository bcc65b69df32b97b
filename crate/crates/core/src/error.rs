//! Error type shared by every solver module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WaveError {
    /// Curve metric collapsed (|d gamma/d alpha| ~ 0) or nodes coincide.
    #[error("degenerate parametrization: min |d gamma/d alpha| = {min_metric:e}")]
    DegenerateParametrization { min_metric: f64 },

    /// The surface stopped being a graph over x. Doubles as the overturning
    /// detector for graph-chart runs.
    #[error("overturned: not a graph (max inclination {max_inclination_deg:.1} deg)")]
    Overturned { max_inclination_deg: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    /// Curve failed a geometric sanity check (self-intersection proximity,
    /// bottom contact).
    #[error("geometry check failed: {0}")]
    Geometry(String),

    /// Dense boundary-integral system could not be factorized.
    #[error("linear solver failed: {0}")]
    Solver(String),

    /// State violates the active chart's assumptions.
    #[error("chart violation: {0}")]
    ChartViolation(String),

    /// Implicit midpoint fixed-point iteration stalled.
    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    FixedPointNoConvergence { iterations: usize, residual: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, WaveError>;

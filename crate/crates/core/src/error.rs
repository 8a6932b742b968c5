use thiserror::Error;

use crate::vector::Vector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("point violates the set by {violation:e} (tolerance {tol:e})")]
    PointNotInSet { violation: f64, tol: f64 },

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("cone is a linear subspace; no retraction onto the sphere slice exists")]
    SubspaceCone,

    #[error("degenerate retraction direction: |x - a| = {0:e}")]
    DegenerateDirection(f64),

    #[error("covering at radius {radius:e} needs more than {cap} centers")]
    RadiusTooSmall { radius: f64, cap: usize },

    #[error("point is not covered by any ball of the covering")]
    UncoveredPoint,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no convergence after {iterations} iterations (best residual {residual:e})")]
    NoConvergence {
        best: Vector,
        residual: f64,
        iterations: usize,
        detail: String,
    },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("map leaves the domain: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::Dimension { expected, got })
        }
    }
}

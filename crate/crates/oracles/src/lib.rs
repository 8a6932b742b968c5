//! Brute-force reference computations, kept independent of the solver code
//! paths: exhaustive grid search for the HS problem, exact convex-hull
//! membership by linear feasibility, and finite-difference continuity probes.

mod continuity;
mod grid;
mod membership;

pub use continuity::{continuity_probe, continuity_probe_at, ContinuityReport, DEFAULT_FLAG_RATIO};
pub use grid::{grid_hs_oracle, GridOracleResult, GridSpec, MAX_GRID_DIM, MAX_GRID_POINTS};
pub use membership::{hull_residual, membership_oracle, MEMBERSHIP_TOL, MAX_MEMBERSHIP_DIM, MAX_MEMBERSHIP_POINTS};

pub type Result<T> = std::result::Result<T, OracleError>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum OracleError {
    #[error("grid has {points} points, above the limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("size limit: {0}")]
    SizeLimit(String),

    #[error(transparent)]
    Core(#[from] vieq_core::Error),
}

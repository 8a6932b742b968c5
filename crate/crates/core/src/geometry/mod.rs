//! Convex sets, projections, polar and normal cones, support functions.

mod cone;
mod nnls;
mod set;

pub use cone::{PolyhedralCone, MAX_CONE_DIM};
pub use set::{ConvexCompactSet, Support};

use serde::{Deserialize, Serialize};

use crate::vector::Vector;

/// Global membership tolerance for geometric predicates.
pub const TAU_GEO: f64 = 1e-9;

/// Nearest point of a closed convex set and its distance to the query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub point: Vector,
    pub distance: f64,
}

pub fn project(k: &ConvexCompactSet, v: &Vector) -> crate::Result<ProjectionResult> {
    k.project(v)
}

pub fn project_cone(cone: &PolyhedralCone, v: &Vector) -> crate::Result<ProjectionResult> {
    cone.project(v)
}

pub fn sample_set(k: &ConvexCompactSet, count: usize, seed: u64) -> Vec<Vector> {
    k.sample(count, seed)
}

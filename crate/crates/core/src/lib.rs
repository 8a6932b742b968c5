//! Variational inequalities and general equilibrium on compact convex sets.
//!
//! The crate solves Hartman–Stampacchia problems
//! `find x ∈ K with <v, f(x)> <= <x, f(x)> for all v ∈ K`, for continuous
//! maps and for upper hemicontinuous correspondences with convex values, and
//! builds market equilibria on the price simplex or on a ball intersected
//! with a polyhedral cone.

pub mod approximation;
pub mod certificate;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod maps;
pub mod retraction;
pub mod vector;
pub mod vi_solver;

pub use error::{Error, Result};
pub use geometry::{ConvexCompactSet, PolyhedralCone, ProjectionResult, Support, TAU_GEO};
pub use maps::{CorrespondenceOracle, MapOracle};
pub use vector::Vector;

//! The interval `[0, 1]` as the simplex `Δ²` via `x ↦ (x, 1 - x)`.

use crate::maps::MapOracle;
use crate::vector::Vector;

pub fn embed(x: f64) -> Vector {
    Vector::raw(vec![x, 1.0 - x])
}

pub fn coordinate(p: &Vector) -> f64 {
    p[0]
}

/// The simplex map induced by `g: [0, 1] -> [0, 1]`.
pub fn interval_map<G>(descriptor: &str, g: G) -> MapOracle
where
    G: Fn(f64) -> f64 + Send + Sync + 'static,
{
    MapOracle::new(2, descriptor, move |p| {
        let y = g(p[0]);
        vec![y, 1.0 - y]
    })
}

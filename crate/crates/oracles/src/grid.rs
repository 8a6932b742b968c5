use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use vieq_core::{ConvexCompactSet, MapOracle, Vector};

use crate::{OracleError, Result};

pub const MAX_GRID_POINTS: u128 = 10_000_000;
pub const MAX_GRID_DIM: usize = 4;

/// Axis step `1 / resolution`. Simplex grids are the compositions of
/// `resolution`; ball grids are the box lattice on `[-1, 1]^N` with the
/// points outside the set rejected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { resolution: 200 }
    }
}

impl GridSpec {
    pub fn new(resolution: usize) -> Self {
        Self { resolution }
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    /// Lattice size before rejection.
    pub fn count(&self, k: &ConvexCompactSet) -> u128 {
        let n = k.dim() as u128;
        let r = self.resolution as u128;
        match k {
            ConvexCompactSet::Simplex { .. } => binomial(r + n - 1, n - 1),
            _ => (2 * r + 1).checked_pow(n as u32).unwrap_or(u128::MAX),
        }
    }

    pub fn points(&self, k: &ConvexCompactSet) -> Result<Vec<Vec<f64>>> {
        let n = k.dim();
        if n > MAX_GRID_DIM {
            return Err(OracleError::SizeLimit(format!("grid search needs dim <= {MAX_GRID_DIM}, got {n}")));
        }
        if self.resolution == 0 {
            return Err(OracleError::SizeLimit("resolution must be positive".into()));
        }
        let count = self.count(k);
        if count > MAX_GRID_POINTS {
            return Err(OracleError::GridTooLarge { points: count, limit: MAX_GRID_POINTS });
        }
        let r = self.resolution;
        let h = self.spacing();
        let mut out = Vec::with_capacity(count as usize);
        match k {
            ConvexCompactSet::Simplex { .. } => {
                let mut idx = vec![0usize; n];
                compositions(&mut idx, 0, r, &mut |c| out.push(c.iter().map(|&i| i as f64 * h).collect()));
            }
            _ => {
                let halfspaces: Vec<Vec<f64>> = k
                    .cone()
                    .map(|c| c.halfspaces().iter().map(|v| v.as_slice().to_vec()).collect())
                    .unwrap_or_default();
                let side = 2 * r + 1;
                let mut idx = vec![0usize; n];
                'outer: loop {
                    let x: Vec<f64> = idx.iter().map(|&i| (i as f64 - r as f64) * h).collect();
                    let inside = x.iter().map(|c| c * c).sum::<f64>() <= 1.0 + 1e-12
                        && halfspaces.iter().all(|a| dot(a, &x) <= 1e-12);
                    if inside {
                        out.push(x);
                    }
                    for i in (0..n).rev() {
                        idx[i] += 1;
                        if idx[i] < side {
                            continue 'outer;
                        }
                        idx[i] = 0;
                    }
                    break;
                }
            }
        }
        Ok(out)
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

fn compositions(idx: &mut [usize], i: usize, left: usize, emit: &mut dyn FnMut(&[usize])) {
    if i + 1 == idx.len() {
        idx[i] = left;
        emit(idx);
        return;
    }
    for a in 0..=left {
        idx[i] = a;
        compositions(idx, i + 1, left - a, emit);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `max_{v ∈ K} <v, c>` computed without the library's support routines.
fn support(k: &ConvexCompactSet, c: &[f64]) -> f64 {
    match k {
        ConvexCompactSet::Simplex { .. } => c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ConvexCompactSet::Ball { .. } => dot(c, c).sqrt(),
        ConvexCompactSet::BallCapCone { cone } => {
            // |π_P(c)| via Dykstra over the facet halfspaces
            let hs: Vec<&[f64]> = cone.halfspaces().iter().map(|h| h.as_slice()).collect();
            let mut x = c.to_vec();
            let mut corr = vec![vec![0.0; c.len()]; hs.len()];
            for _ in 0..10_000 {
                let mut moved = 0.0;
                for (h, q) in hs.iter().zip(corr.iter_mut()) {
                    let y: Vec<f64> = x.iter().zip(q.iter()).map(|(a, b)| a + b).collect();
                    let ex = dot(h, &y).max(0.0) / dot(h, h);
                    let next: Vec<f64> = y.iter().zip(h.iter()).map(|(a, b)| a - ex * b).collect();
                    for ((qi, yi), ni) in q.iter_mut().zip(&y).zip(&next) {
                        *qi = yi - ni;
                    }
                    moved += x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum::<f64>();
                    x = next;
                }
                if moved < 1e-15 {
                    break;
                }
            }
            dot(&x, &x).sqrt()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOracleResult {
    pub point: Vector,
    pub residual: f64,
    pub spacing: f64,
    pub points: usize,
}

/// Exhaustive minimization of the HS residual over the grid. Ties are broken
/// by lexicographic order of the point, so the result does not depend on
/// thread scheduling.
pub fn grid_hs_oracle(k: &ConvexCompactSet, f: &MapOracle, grid: GridSpec) -> Result<GridOracleResult> {
    let pts = grid.points(k)?;
    let best = pts
        .par_iter()
        .map(|x| {
            let v = Vector::from_slice(x)?;
            let fx = f.eval(&v)?;
            let res = support(k, fx.as_slice()) - dot(x, fx.as_slice());
            Ok::<_, vieq_core::Error>((res, x))
        })
        .try_reduce_with(|a, b| Ok(if better(&a, &b) { a } else { b }))
        .ok_or_else(|| OracleError::SizeLimit("grid is empty".into()))??;
    Ok(GridOracleResult {
        point: Vector::from_slice(best.1)?,
        residual: best.0,
        spacing: grid.spacing(),
        points: pts.len(),
    })
}

fn better(a: &(f64, &Vec<f64>), b: &(f64, &Vec<f64>)) -> bool {
    match a.0.total_cmp(&b.0) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => {
            a.1.iter()
                .zip(b.1.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
                .is_le()
        }
    }
}

//! Reduction of a convex combination to at most `N + 1` points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// At most `N + 1` points with positive weights summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaratheodoryDecomposition {
    pub points: Vec<Vector>,
    pub weights: Vec<f64>,
    /// Position of each retained point in the input list.
    pub indices: Vec<usize>,
}

impl CaratheodoryDecomposition {
    pub fn target(&self) -> Vector {
        let dim = self.points.first().map_or(0, Vector::dim);
        Vector::combination(dim, &self.points, &self.weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Removes affine dependences one at a time until the remaining points are
/// few enough to be affinely independent.
pub fn caratheodory_reduce(points: &[Vector], weights: &[f64]) -> Result<CaratheodoryDecomposition> {
    if points.is_empty() {
        return Err(Error::InvalidWeights("no points".into()));
    }
    if points.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    let dim = points[0].dim();
    for p in points {
        Error::check_dim(dim, p.dim())?;
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < -1e-12) {
        return Err(Error::InvalidWeights(format!("weight {w} is negative or not finite")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
    }

    let mut idx: Vec<usize> = (0..points.len()).filter(|&i| weights[i] > 0.0).collect();
    let mut w: Vec<f64> = idx.iter().map(|&i| weights[i]).collect();

    while idx.len() > dim + 1 {
        let head = &idx[..dim + 2];
        let mut mu = affine_dependence(points, head, dim);
        if !mu.iter().any(|&m| m > 0.0) {
            mu.iter_mut().for_each(|m| *m = -*m);
        }
        let (t, drop) = (0..mu.len())
            .filter(|&k| mu[k] > 0.0)
            .map(|k| (w[k] / mu[k], k))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("a dependence has a positive entry");
        for (k, m) in mu.iter().enumerate() {
            w[k] -= t * m;
        }
        w[drop] = 0.0;
        let mut k = 0;
        while k < idx.len() {
            if w[k] <= 0.0 {
                idx.remove(k);
                w.remove(k);
            } else {
                k += 1;
            }
        }
    }

    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    Ok(CaratheodoryDecomposition {
        points: idx.iter().map(|&i| points[i].clone()).collect(),
        weights: w,
        indices: idx,
    })
}

/// Nonzero `μ` with `Σ μ_k p_k = 0` and `Σ μ_k = 0` over `dim + 2` points,
/// from the reduced row echelon form of the `(dim + 1) x (dim + 2)` system.
fn affine_dependence(points: &[Vector], cols: &[usize], dim: usize) -> Vec<f64> {
    let rows = dim + 1;
    let n = cols.len();
    let mut a: Vec<Vec<f64>> = (0..rows)
        .map(|r| {
            cols.iter()
                .map(|&c| if r < dim { points[c][r] } else { 1.0 })
                .collect()
        })
        .collect();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let tol = 1e-12 * scale;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if val <= tol {
            continue;
        }
        a.swap(r, best);
        let p = a[r][c];
        for x in a[r].iter_mut() {
            *x /= p;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                row.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..n).find(|c| !pivots.contains(c)).expect("more columns than rows");
    let mut mu = vec![0.0; n];
    mu[free] = 1.0;
    for (row, &pc) in pivots.iter().enumerate() {
        mu[pc] = -a[row][free];
    }
    mu
}

//! `target ∈ conv(points)` by phase-one simplex on
//! `P λ = t, 1ᵀλ = 1, λ >= 0`. The phase-one optimum is the smallest
//! `|P λ - t|_1 + |1ᵀλ - 1|` over `λ >= 0`.

use vieq_core::Vector;

use crate::{OracleError, Result};

pub const MAX_MEMBERSHIP_POINTS: usize = 50;
pub const MAX_MEMBERSHIP_DIM: usize = 6;
pub const MEMBERSHIP_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-12;

/// With `weights`, checks that they form a valid convex combination hitting
/// `target` (and that `target` is in the hull); without, decides membership.
pub fn membership_oracle(points: &[Vector], weights: Option<&[f64]>, target: &Vector) -> Result<bool> {
    let r = hull_residual(points, target)?;
    if r > MEMBERSHIP_TOL {
        return Ok(false);
    }
    let Some(w) = weights else {
        return Ok(true);
    };
    if w.len() != points.len() || w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Ok(false);
    }
    if (w.iter().sum::<f64>() - 1.0).abs() > MEMBERSHIP_TOL {
        return Ok(false);
    }
    let n = target.dim();
    let err = (0..n)
        .map(|i| {
            let s: f64 = points.iter().zip(w).map(|(p, wi)| wi * p[i]).sum();
            (s - target[i]).abs()
        })
        .fold(0.0, f64::max);
    Ok(err <= MEMBERSHIP_TOL)
}

/// Phase-one optimum (an L1 distance surrogate; zero iff inside).
pub fn hull_residual(points: &[Vector], target: &Vector) -> Result<f64> {
    let n = target.dim();
    let m = points.len();
    if m == 0 || m > MAX_MEMBERSHIP_POINTS {
        return Err(OracleError::SizeLimit(format!("need 1..={MAX_MEMBERSHIP_POINTS} points, got {m}")));
    }
    if n > MAX_MEMBERSHIP_DIM {
        return Err(OracleError::SizeLimit(format!("dimension {n} above {MAX_MEMBERSHIP_DIM}")));
    }
    if let Some(p) = points.iter().find(|p| p.dim() != n) {
        return Err(vieq_core::Error::Dimension { expected: n, got: p.dim() }.into());
    }

    // rows: n coordinates plus the affine row; columns: m weights, rows
    // artificials, rhs
    let rows = n + 1;
    let cols = m + rows + 1;
    let mut t = vec![vec![0.0; cols]; rows];
    for i in 0..rows {
        let (coeffs, rhs): (Vec<f64>, f64) = if i < n {
            (points.iter().map(|p| p[i]).collect(), target[i])
        } else {
            (vec![1.0; m], 1.0)
        };
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        for j in 0..m {
            t[i][j] = sign * coeffs[j];
        }
        t[i][m + i] = 1.0;
        t[i][cols - 1] = sign * rhs;
    }
    let mut basis: Vec<usize> = (m..m + rows).collect();

    // reduced costs of the phase-one objective (sum of artificials)
    let reduced = |t: &[Vec<f64>], basis: &[usize], j: usize| -> f64 {
        let cj = if j >= m { 1.0 } else { 0.0 };
        cj - t.iter().zip(basis).map(|(row, &b)| if b >= m { row[j] } else { 0.0 }).sum::<f64>()
    };

    for _ in 0..10_000 {
        // Bland's rule: lowest-index entering column with negative reduced cost
        let Some(enter) = (0..m + rows).find(|&j| !basis.contains(&j) && reduced(&t, &basis, j) < -PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter] > PIVOT_EPS {
                let ratio = row[cols - 1] / row[enter];
                let take = match leave {
                    None => true,
                    Some((l, best)) => ratio < best - PIVOT_EPS || (ratio <= best + PIVOT_EPS && basis[i] < basis[l]),
                };
                if take {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            break;
        };
        let piv = t[r][enter];
        t[r].iter_mut().for_each(|x| *x /= piv);
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[enter] != 0.0 {
                let f = row[enter];
                row.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
            }
        }
        basis[r] = enter;
    }

    Ok(t
        .iter()
        .zip(&basis)
        .filter(|(_, &b)| b >= m)
        .map(|(row, _)| row[cols - 1].max(0.0))
        .sum())
}

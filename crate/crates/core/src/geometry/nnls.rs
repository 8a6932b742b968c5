//! Lawson–Hanson nonnegative least squares: `min |A x - b|` subject to `x >= 0`.

use nalgebra::{DMatrix, DVector};

/// Solves the NNLS problem for a dense `m x n` matrix given as columns.
///
/// Returns the coefficient vector. The columns need not be linearly
/// independent; the passive set the algorithm maintains stays independent.
pub(crate) fn nnls(columns: &[&[f64]], b: &[f64]) -> Vec<f64> {
    let n = columns.len();
    let m = b.len();
    if n == 0 {
        return Vec::new();
    }
    let a = DMatrix::from_fn(m, n, |i, j| columns[j][i]);
    let b = DVector::from_column_slice(b);

    let scale = a.norm().max(1.0) * b.norm().max(1.0);
    let tol = 1e-13 * scale * (m.max(n) as f64);

    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 30;

    for _ in 0..max_outer {
        let w = a.transpose() * (&b - &a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        if w[j] <= tol {
            break;
        }
        passive[j] = true;

        let mut inner = 0;
        loop {
            inner += 1;
            let z = solve_passive(&a, &b, &passive);
            let all_positive = (0..n).filter(|&i| passive[i]).all(|i| z[i] > 0.0);
            if all_positive || inner > 3 * n + 10 {
                x = z;
                // clamp anything the fallback exit left nonpositive
                for i in 0..n {
                    if x[i] < 0.0 {
                        x[i] = 0.0;
                        passive[i] = false;
                    }
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for i in 0..n {
                if passive[i] && z[i] <= 0.0 {
                    let denom = x[i] - z[i];
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            x = &x + (&z - &x) * alpha;
            let floor = 1e-15 * x.amax().max(1.0);
            for i in 0..n {
                if passive[i] && x[i] <= floor {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    x.iter().copied().collect()
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let mut z = DVector::zeros(passive.len());
    if idx.is_empty() {
        return z;
    }
    let sub = a.select_columns(&idx);
    let sol = least_squares_qr(&sub, b).unwrap_or_else(|| least_squares_svd(&sub, b));
    for (k, &i) in idx.iter().enumerate() {
        z[i] = sol[k];
    }
    z
}

/// Householder QR with one refinement step; `None` when the columns are
/// numerically dependent.
fn least_squares_qr(sub: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if sub.nrows() < sub.ncols() {
        return None;
    }
    let qr = sub.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..r.ncols()).map(|i| r[(i, i)].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    if dmax == 0.0 || diag.iter().any(|&d| d <= dmax * 1e-10) {
        return None;
    }
    let solve = |rhs: &DVector<f64>| {
        let qtb = qr.q().transpose() * rhs;
        r.solve_upper_triangular(&qtb)
    };
    let mut x = solve(b)?;
    let correction = solve(&(b - sub * &x))?;
    x += correction;
    Some(x)
}

fn least_squares_svd(sub: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let size = sub.nrows().max(sub.ncols()) as f64;
    let svd = sub.clone().svd(true, true);
    let eps = svd.singular_values.max() * 1e-13 * size;
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(sub.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthant_projection() {
        let e1 = [1.0, 0.0];
        let e2 = [0.0, 1.0];
        let x = nnls(&[&e1, &e2], &[1.0, -1.0]);
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn dependent_columns() {
        let cols: Vec<[f64; 2]> = vec![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let x = nnls(&refs, &[-2.0, 3.0]);
        let fit = [x[0] - x[1], x[2] - x[3]];
        assert!((fit[0] + 2.0).abs() < 1e-12);
        assert!((fit[1] - 3.0).abs() < 1e-12);
        assert!(x.iter().all(|&c| c >= 0.0));
    }
}

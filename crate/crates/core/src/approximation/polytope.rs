//! Nearest point of a polytope `conv(V)` by Wolfe's minimum-norm-point method.

use nalgebra::{DMatrix, DVector};

use crate::vector::Vector;

/// Nearest point of `conv(vertices)` to `z` with its convex weights.
pub(crate) fn nearest_point(vertices: &[Vector], z: &Vector) -> (Vector, Vec<f64>) {
    let shifted: Vec<Vector> = vertices.iter().map(|v| v - z).collect();
    let weights = min_norm_weights(&shifted);
    let point = Vector::combination(z.dim(), vertices, &weights);
    (point, weights)
}

fn min_norm_weights(points: &[Vector]) -> Vec<f64> {
    let m = points.len();
    let scale = points.iter().map(|p| p.norm_sq()).fold(0.0, f64::max).max(1e-300);
    let eps = 1e-14;
    let start = (0..m)
        .min_by(|&i, &j| points[i].norm_sq().total_cmp(&points[j].norm_sq()))
        .expect("nonempty vertex list");
    let mut active = vec![start];
    let mut lambda = vec![1.0];
    let dim = points[0].dim();
    let mut x = points[start].clone();

    for _ in 0..(50 * m + 100) {
        let (j, xj) = (0..m)
            .map(|j| (j, x.dot(&points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if x.norm_sq() - xj <= eps * scale || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);
        for _ in 0..(m + 10) {
            let mu = affine_min_norm(points, &active);
            if mu.iter().all(|&c| c > eps) {
                lambda = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (l, u) in lambda.iter().zip(&mu) {
                if *u <= eps {
                    let d = l - u;
                    if d > 0.0 {
                        theta = theta.min(l / d);
                    }
                }
            }
            let theta = theta.clamp(0.0, 1.0);
            for (l, u) in lambda.iter_mut().zip(&mu) {
                *l += theta * (u - *l);
            }
            let mut k = 0;
            while k < active.len() {
                if lambda[k] <= eps {
                    active.remove(k);
                    lambda.remove(k);
                } else {
                    k += 1;
                }
            }
            if active.len() == 1 {
                lambda = vec![1.0];
                break;
            }
        }
        let sel: Vec<Vector> = active.iter().map(|&i| points[i].clone()).collect();
        x = Vector::combination(dim, &sel, &lambda);
    }
    let s: f64 = lambda.iter().sum();
    let mut out = vec![0.0; m];
    for (&i, w) in active.iter().zip(&lambda) {
        out[i] += w / s;
    }
    out
}

/// Weights of the point of minimum norm in the affine hull of `points[active]`.
fn affine_min_norm(points: &[Vector], active: &[usize]) -> Vec<f64> {
    let k = active.len();
    let mut a = DMatrix::<f64>::zeros(k + 1, k + 1);
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            a[(r, c)] = points[i].dot(&points[j]);
        }
        a[(r, k)] = 1.0;
        a[(k, r)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let lu = a.clone().full_piv_lu();
    let mut sol = match lu.solve(&rhs) {
        Some(x) if x.iter().all(|c| c.is_finite()) => x,
        _ => {
            let svd = a.clone().svd(true, true);
            let smax = svd.singular_values.max();
            svd.solve(&rhs, smax * 1e-14)
                .unwrap_or_else(|_| DVector::from_element(k + 1, 1.0 / k as f64))
        }
    };
    // one step of iterative refinement
    let r = &rhs - &a * &sol;
    if let Some(d) = lu.solve(&r) {
        if d.iter().all(|c| c.is_finite()) {
            sol += d;
        }
    }
    (0..k).map(|i| sol[i]).collect()
}

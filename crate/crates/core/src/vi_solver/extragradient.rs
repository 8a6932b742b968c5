//! Projected extragradient iteration with an adaptive step.

use super::{Objective, TraceEntry};
use crate::error::Result;
use crate::vector::Vector;

/// Local-Lipschitz test constant: accept `γ` when `γ|f(y) - f(x)| <= ν|y - x|`.
const NU: f64 = 0.9;
/// Window over which the best merit must drop by `STALL_FACTOR`.
const STALL_WINDOW: usize = 500;
const STALL_FACTOR: f64 = 0.9;

pub(crate) struct Run {
    pub best: Vector,
    pub best_value: Vector,
    pub best_merit: f64,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub success: bool,
}

pub(crate) fn run(obj: &Objective<'_>, start: &Vector, step0: f64, backtrack: f64, budget: usize) -> Result<Run> {
    let k = obj.set;
    let mut x = k.project_point(start);
    let mut fx = obj.map.eval(&x)?;
    let mut merit = obj.merit(&x, &fx);
    let mut trace = vec![TraceEntry::new(0, merit, &x)];
    let mut out = Run {
        best: x.clone(),
        best_value: fx.clone(),
        best_merit: merit,
        iterations: 0,
        trace: Vec::new(),
        success: merit <= obj.tol,
    };
    let gamma_max = 100.0 * step0;
    let mut gamma = step0;
    let mut window_best = merit;

    for it in 1..=budget {
        if out.success {
            break;
        }
        let (y, fy) = loop {
            let y = k.project_point(&x.axpy(gamma, &fx));
            let fy = obj.map.eval(&y)?;
            let dy = y.dist(&x);
            if gamma * fy.dist(&fx) <= NU * dy || dy == 0.0 {
                if gamma * fy.dist(&fx) < 0.5 * NU * dy {
                    gamma = (gamma / backtrack).min(gamma_max);
                }
                break (y, fy);
            }
            gamma *= backtrack;
            if gamma < 1e-16 {
                break (y, fy);
            }
        };
        let moved = y.dist(&x);
        let xn = k.project_point(&x.axpy(gamma, &fy));
        x = xn;
        fx = obj.map.eval(&x)?;
        merit = obj.merit(&x, &fx);
        out.iterations = it;
        trace.push(TraceEntry::new(it, merit, &x));
        if merit < out.best_merit {
            out.best = x.clone();
            out.best_value = fx.clone();
            out.best_merit = merit;
        }
        if merit <= obj.tol {
            out.best = x.clone();
            out.best_value = fx.clone();
            out.best_merit = merit;
            out.success = true;
            break;
        }
        if moved == 0.0 || gamma < 1e-16 {
            break;
        }
        if it % STALL_WINDOW == 0 {
            if out.best_merit > STALL_FACTOR * window_best {
                break;
            }
            window_best = out.best_merit;
        }
    }
    out.trace = trace;
    Ok(out)
}

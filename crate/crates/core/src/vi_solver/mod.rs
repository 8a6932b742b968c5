//! Hartman–Stampacchia solver: find `x ∈ K` with `<v, f(x)> <= <x, f(x)>`
//! for every `v ∈ K`, i.e. `f(x) ∈ N_K(x)`.
//!
//! The search runs a multi-start projected extragradient iteration and,
//! in low dimension, falls back to a coarse-to-fine grid on the exactly
//! computable residual followed by an extragradient polish.

mod config;
mod correspondence;
mod extragradient;
mod grid;

pub use config::SolverConfig;
pub use correspondence::{
    approximation_path, solve_hs_correspondence, CorrespondenceVISolution, EpsilonStep,
};
pub(crate) use correspondence::epsilon_scheme;

use serde::{Deserialize, Serialize};

use crate::certificate::{Check, CertificateReport};
use crate::error::{Error, Result};
use crate::geometry::{ConvexCompactSet, TAU_GEO};
use crate::maps::MapOracle;
use crate::vector::Vector;

/// One row of a solver trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub residual: f64,
    pub point: Vector,
}

impl TraceEntry {
    pub(crate) fn new(iter: usize, residual: f64, point: &Vector) -> Self {
        Self {
            iter,
            residual,
            point: point.clone(),
        }
    }

    /// One row per radius level of the correspondence scheme.
    pub fn from_step(step: &EpsilonStep) -> Self {
        Self::new(step.level, step.residual.max(step.membership_gap), &step.point)
    }
}

/// Which phase produced the certified point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Extragradient,
    Grid,
    Hybrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VISolution {
    pub point: Vector,
    pub value: Vector,
    pub residual: f64,
    /// Extragradient iterations plus grid evaluations.
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub method: Method,
    /// `|π_K(x + f(x)) - x|`
    pub fixed_point_gap: f64,
}

/// `max_{v ∈ K} <v, f(x)> - <x, f(x)>`
pub fn hs_residual(k: &ConvexCompactSet, f: &MapOracle, x: &Vector) -> Result<f64> {
    k.ensure_member(x, TAU_GEO)?;
    let fx = f.eval(x)?;
    residual_of(k, x, &fx)
}

/// HS residual of a fixed vector `z` at `x`.
pub fn residual_of(k: &ConvexCompactSet, x: &Vector, z: &Vector) -> Result<f64> {
    Ok(k.support_max(z)?.value - x.dot(z))
}

/// `|π_K(x + z) - x|`; zero exactly when `z ∈ N_K(x)`.
pub fn natural_map_gap(k: &ConvexCompactSet, x: &Vector, z: &Vector) -> Result<f64> {
    Ok(k.project(&(x + z))?.point.dist(x))
}

pub(crate) struct Objective<'a> {
    pub set: &'a ConvexCompactSet,
    pub map: &'a MapOracle,
    pub tol: f64,
    /// Also require `|f(x)| <= tol`, used for fixed-point problems.
    pub small_value: bool,
}

impl Objective<'_> {
    pub fn merit(&self, x: &Vector, fx: &Vector) -> f64 {
        let r = self.set.support_point(fx).value - x.dot(fx);
        if self.small_value {
            r.max(fx.norm())
        } else {
            r
        }
    }
}

pub fn solve_hs(k: &ConvexCompactSet, f: &MapOracle, cfg: &SolverConfig) -> Result<VISolution> {
    solve_with(k, f, cfg, false, &[])
}

/// Solver entry point with optional warm starts tried before the defaults.
pub(crate) fn solve_with(
    k: &ConvexCompactSet,
    f: &MapOracle,
    cfg: &SolverConfig,
    small_value: bool,
    warm: &[Vector],
) -> Result<VISolution> {
    cfg.validate()?;
    Error::check_dim(k.dim(), f.dim())?;
    for w in warm {
        Error::check_dim(k.dim(), w.dim())?;
    }
    let obj = Objective {
        set: k,
        map: f,
        tol: cfg.tol,
        small_value,
    };

    let starts = start_points(k, cfg, warm);
    let budget = (cfg.max_iter / (cfg.restarts + 1)).max(200);
    let mut spent = 0usize;
    let mut best: Option<(Vector, Vector, f64)> = None;
    let keep_best = |x: &Vector, fx: &Vector, m: f64, best: &mut Option<(Vector, Vector, f64)>| {
        if best.as_ref().is_none_or(|b| m < b.2) {
            *best = Some((x.clone(), fx.clone(), m));
        }
    };

    for s in &starts {
        if spent >= cfg.max_iter {
            break;
        }
        let run = extragradient::run(&obj, s, cfg.step, cfg.backtrack, budget.min(cfg.max_iter - spent))?;
        spent += run.iterations;
        if run.success {
            return finish(k, run.best, run.best_value, spent, run.trace, Method::Extragradient);
        }
        keep_best(&run.best, &run.best_value, run.best_merit, &mut best);
    }

    if k.dim() <= cfg.grid_fallback_dim {
        let g = grid::search(&obj);
        spent += g.evaluations;
        if g.success {
            return finish(k, g.best, g.best_value, spent, g.trace, Method::Grid);
        }
        let run = extragradient::run(&obj, &g.best, cfg.step, cfg.backtrack, budget)?;
        spent += run.iterations;
        if run.success {
            let mut trace = g.trace;
            let offset = trace.last().map_or(0, |t| t.iter + 1);
            trace.extend(run.trace.into_iter().map(|mut t| {
                t.iter += offset;
                t
            }));
            return finish(k, run.best, run.best_value, spent, trace, Method::Hybrid);
        }
        keep_best(&g.best, &g.best_value, g.best_merit, &mut best);
        keep_best(&run.best, &run.best_value, run.best_merit, &mut best);
    }

    let (x, _, merit) = best.expect("at least one start ran");
    Err(Error::NoConvergence {
        best: x,
        residual: merit,
        iterations: spent,
        detail: format!("no start reached tolerance {:e}", cfg.tol),
    })
}

fn finish(
    k: &ConvexCompactSet,
    point: Vector,
    value: Vector,
    iterations: usize,
    trace: Vec<TraceEntry>,
    method: Method,
) -> Result<VISolution> {
    let residual = residual_of(k, &point, &value)?;
    let fixed_point_gap = natural_map_gap(k, &point, &value)?;
    Ok(VISolution {
        point,
        value,
        residual,
        iterations,
        trace,
        method,
        fixed_point_gap,
    })
}

/// Warm starts, then the set's center, then seeded points pulled halfway
/// toward the center.
fn start_points(k: &ConvexCompactSet, cfg: &SolverConfig, warm: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = warm.iter().map(|w| k.project_point(w)).collect();
    let center = k.center();
    out.push(center.clone());
    let extra = cfg.restarts.saturating_sub(1);
    let pool = k.sample(k.dim() + 2 + cfg.restarts + extra, cfg.seed);
    for p in pool.iter().rev().take(extra).rev() {
        out.push(k.project_point(&center.axpy(0.5, &(p - &center))));
    }
    out
}

/// Recomputes membership, the HS residual and the natural-map gap of a
/// candidate solution.
pub fn verify_hs(k: &ConvexCompactSet, f: &MapOracle, x: &Vector, tol: f64) -> CertificateReport {
    match f.eval(x) {
        Ok(fx) => verify_hs_pair(k, x, &fx, tol),
        Err(e) => CertificateReport::new(vec![Check {
            name: format!("evaluation: {e}"),
            value: f64::INFINITY,
            tol,
            passed: false,
        }]),
    }
}

/// As [`verify_hs`] for an explicit value `z` at `x`.
pub fn verify_hs_pair(k: &ConvexCompactSet, x: &Vector, z: &Vector, tol: f64) -> CertificateReport {
    if x.dim() != k.dim() || z.dim() != k.dim() {
        return CertificateReport::new(vec![Check::at_most("dimension", f64::INFINITY, 0.0)]);
    }
    let membership = Check::at_most("membership", k.violation(x), TAU_GEO);
    let residual = k.support_point(z).value - x.dot(z);
    let gap = k.project_point(&(x + z)).dist(x);
    CertificateReport::new(vec![
        membership,
        Check::at_most("hs_residual", residual, tol),
        Check::at_most("fixed_point_gap", gap, tol.sqrt()),
    ])
}

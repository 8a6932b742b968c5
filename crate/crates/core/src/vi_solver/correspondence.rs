//! Correspondence form of the HS problem, solved through a sequence of
//! continuous approximations at radii `ε_k = ε_0 · decay^k`.
//!
//! At level `k` the approximation `f^k` is solved, and its value at the
//! solution is decomposed into at most `N + 1` center selections. Those
//! selections fix a mixture `μ` of the branches; the continuous map
//! `x ↦ Σ μ_j f_j(x)` takes values inside `ζ(x)` everywhere, so solving it
//! from the level-`k` point yields an exact candidate. The first level with a
//! passing certificate ends the scheme.

use serde::{Deserialize, Serialize};

use super::{residual_of, solve_with, SolverConfig};
use crate::approximation::{
    approximate_map, correspondence_distance, nearest_in_value, Covering, PartitionOfUnity,
};
use crate::error::{Error, Result};
use crate::geometry::ConvexCompactSet;
use crate::maps::{CorrespondenceOracle, MapOracle};
use crate::vector::Vector;

const MAX_LEVELS: usize = 40;

/// Diagnostics for one radius of the schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonStep {
    pub level: usize,
    pub epsilon: f64,
    pub centers: usize,
    pub point: Vector,
    pub residual: f64,
    pub membership_gap: f64,
    /// `true` for the frozen-mixture solve that follows the raw one.
    pub frozen_mixture: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceVISolution {
    pub point: Vector,
    pub witness: Vector,
    pub residual: f64,
    pub membership_gap: f64,
    pub epsilon_final: f64,
    pub iterations: usize,
    pub steps: Vec<EpsilonStep>,
    /// Branch weights of the frozen mixture, when that solve produced the point.
    pub branch_mixture: Option<Vec<f64>>,
}

pub(crate) struct SchemeOutcome {
    pub point: Vector,
    pub witness: Vector,
    pub residual: f64,
    pub gap: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub steps: Vec<EpsilonStep>,
    pub mixture: Option<Vec<f64>>,
}

type InnerSolve<'a> = dyn Fn(&MapOracle, &[Vector]) -> Result<(Vector, usize)> + 'a;
type Score<'a> = dyn Fn(&Vector, &Vector) -> Result<(Vector, f64, f64)> + 'a;

fn level_seed(seed: u64, level: usize, salt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(level as u64)
        .wrapping_add(salt << 32)
}

fn build_level(
    k: &ConvexCompactSet,
    zeta: &CorrespondenceOracle,
    cfg: &SolverConfig,
    level: usize,
) -> Result<crate::approximation::ApproxMap> {
    let eps = cfg.epsilon(level);
    let covering = Covering::build_with_cap(k, eps, level_seed(cfg.seed, level, 1), cfg.center_cap)?;
    approximate_map(zeta, PartitionOfUnity::new(covering), level_seed(cfg.seed, level, 2))
}

/// `x ↦ Σ μ_j f_j(x)`
pub(crate) fn mixture_map(branches: &[MapOracle], mu: &[f64]) -> MapOracle {
    let dim = branches[0].dim();
    let branches = branches.to_vec();
    let mu = mu.to_vec();
    MapOracle::new(dim, "frozen-mixture", move |x| {
        let x = Vector::raw(x.to_vec());
        let mut out = vec![0.0; dim];
        for (b, m) in branches.iter().zip(&mu) {
            if *m == 0.0 {
                continue;
            }
            match b.eval(&x) {
                Ok(v) => out.iter_mut().zip(v.iter()).for_each(|(o, c)| *o += m * c),
                Err(_) => return vec![f64::NAN; dim],
            }
        }
        out
    })
}

pub(crate) fn epsilon_scheme(
    k: &ConvexCompactSet,
    zeta: &CorrespondenceOracle,
    cfg: &SolverConfig,
    solve: &InnerSolve<'_>,
    score: &Score<'_>,
) -> Result<SchemeOutcome> {
    cfg.validate()?;
    Error::check_dim(k.dim(), zeta.dim())?;
    let accept = 10.0 * cfg.tol;
    let mut steps = Vec::new();
    let mut iterations = 0;
    let mut prev: Option<Vector> = None;
    let mut best: Option<(Vector, f64)> = None;

    let consider = |x: &Vector, merit: f64, best: &mut Option<(Vector, f64)>| {
        if best.as_ref().is_none_or(|b| merit < b.1) {
            *best = Some((x.clone(), merit));
        }
    };

    for level in 0..MAX_LEVELS {
        let eps = cfg.epsilon(level);
        let approx = match build_level(k, zeta, cfg, level) {
            Ok(a) => a,
            Err(Error::RadiusTooSmall { .. }) => break,
            Err(e) => return Err(e),
        };
        let centers = approx.partition().covering().len();
        let fk = approx.to_map_oracle();
        let warm: Vec<Vector> = prev.iter().cloned().collect();
        let x = match solve(&fk, &warm) {
            Ok((x, it)) => {
                iterations += it;
                x
            }
            Err(Error::NoConvergence { best, iterations: it, .. }) => {
                iterations += it;
                best
            }
            Err(e) => return Err(e),
        };
        let cand = fk.eval(&x)?;
        let (w, res, gap) = score(&x, &cand)?;
        steps.push(EpsilonStep {
            level,
            epsilon: eps,
            centers,
            point: x.clone(),
            residual: res,
            membership_gap: gap,
            frozen_mixture: false,
        });
        consider(&x, res.max(gap), &mut best);
        if res <= accept && gap <= accept {
            return Ok(SchemeOutcome {
                point: x,
                witness: w,
                residual: res,
                gap,
                epsilon: eps,
                iterations,
                steps,
                mixture: None,
            });
        }

        if let (Some(branches), Some(mixtures)) = (zeta.branches(), approx.mixtures()) {
            if let Ok(d) = approx.decompose(&x) {
                let mut mu = vec![0.0; branches.len()];
                for (&i, beta) in d.indices.iter().zip(&d.weights) {
                    for (m, w) in mu.iter_mut().zip(&mixtures[i]) {
                        *m += beta * w;
                    }
                }
                let g = mixture_map(branches, &mu);
                let solved = match solve(&g, std::slice::from_ref(&x)) {
                    Ok((x2, it)) => {
                        iterations += it;
                        Some(x2)
                    }
                    Err(Error::NoConvergence { best, iterations: it, .. }) => {
                        iterations += it;
                        Some(best)
                    }
                    Err(_) => None,
                };
                if let Some(x2) = solved {
                    let cand2 = g.eval(&x2)?;
                    let (w2, res2, gap2) = score(&x2, &cand2)?;
                    steps.push(EpsilonStep {
                        level,
                        epsilon: eps,
                        centers,
                        point: x2.clone(),
                        residual: res2,
                        membership_gap: gap2,
                        frozen_mixture: true,
                    });
                    consider(&x2, res2.max(gap2), &mut best);
                    if res2 <= accept && gap2 <= accept {
                        return Ok(SchemeOutcome {
                            point: x2,
                            witness: w2,
                            residual: res2,
                            gap: gap2,
                            epsilon: eps,
                            iterations,
                            steps,
                            mixture: Some(mu),
                        });
                    }
                }
            }
        }
        prev = Some(x);
    }

    let (x, merit) = best.unwrap_or_else(|| (k.center(), f64::INFINITY));
    let last = steps.last().map_or(cfg.epsilon0, |s| s.epsilon);
    Err(Error::NoConvergence {
        best: x,
        residual: merit,
        iterations,
        detail: format!(
            "radius schedule ended at ε = {last:e} after {} steps without a passing certificate",
            steps.len()
        ),
    })
}

pub fn solve_hs_correspondence(
    k: &ConvexCompactSet,
    zeta: &CorrespondenceOracle,
    cfg: &SolverConfig,
) -> Result<CorrespondenceVISolution> {
    let solve = |f: &MapOracle, warm: &[Vector]| -> Result<(Vector, usize)> {
        let s = solve_with(k, f, cfg, false, warm)?;
        Ok((s.point, s.iterations))
    };
    let score = |x: &Vector, cand: &Vector| -> Result<(Vector, f64, f64)> {
        let w = nearest_in_value(zeta, x, cand)?;
        let res = residual_of(k, x, &w)?;
        let gap = correspondence_distance(zeta, x, &w)?;
        Ok((w, res, gap))
    };
    let out = epsilon_scheme(k, zeta, cfg, &solve, &score)?;
    Ok(CorrespondenceVISolution {
        point: out.point,
        witness: out.witness,
        residual: out.residual,
        membership_gap: out.gap,
        epsilon_final: out.epsilon,
        iterations: out.iterations,
        steps: out.steps,
        branch_mixture: out.mixture,
    })
}

/// Solutions of the raw approximations `f^0, ..., f^{levels-1}`, each warm
/// started from the previous one, paired with their radius.
pub fn approximation_path(
    k: &ConvexCompactSet,
    zeta: &CorrespondenceOracle,
    cfg: &SolverConfig,
    levels: usize,
) -> Result<Vec<(f64, Vector)>> {
    cfg.validate()?;
    let mut out: Vec<(f64, Vector)> = Vec::with_capacity(levels);
    for level in 0..levels {
        let fk = build_level(k, zeta, cfg, level)?.to_map_oracle();
        let warm: Vec<Vector> = out.last().map(|p| p.1.clone()).into_iter().collect();
        let s = solve_with(k, &fk, cfg, false, &warm)?;
        out.push((cfg.epsilon(level), s.point));
    }
    Ok(out)
}

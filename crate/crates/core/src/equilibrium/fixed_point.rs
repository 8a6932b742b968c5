//! Fixed points through the HS problem for `g(x) = f(x) - x`.

use serde::{Deserialize, Serialize};

use crate::approximation::nearest_in_value;
use crate::error::{Error, Result};
use crate::geometry::ConvexCompactSet;
use crate::maps::{CorrespondenceOracle, MapOracle};
use crate::vector::Vector;
use crate::vi_solver::{epsilon_scheme, residual_of, solve_with, EpsilonStep, SolverConfig, TraceEntry};

const RANGE_SAMPLES: usize = 64;
const RANGE_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub point: Vector,
    /// `f(x̄)`, or the point of `ζ(x̄)` nearest to `x̄`.
    pub value: Vector,
    /// `|f(x̄) - x̄|`, or the distance from `x̄` to `ζ(x̄)`.
    pub gap: f64,
    /// HS residual of `value - x̄` at `x̄`.
    pub hs_residual: f64,
    pub iterations: usize,
    pub method: String,
    pub epsilon_final: Option<f64>,
    pub steps: Vec<EpsilonStep>,
    pub branch_mixture: Option<Vec<f64>>,
    #[serde(skip)]
    pub trace: Vec<TraceEntry>,
}

/// Spot-checks that the values at sampled points of `c` stay in `c`.
fn check_range(c: &ConvexCompactSet, values: impl Fn(&Vector) -> Result<Vec<Vector>>, seed: u64) -> Result<()> {
    let mut pts = c.sample(RANGE_SAMPLES, seed);
    pts.push(c.center());
    for x in &pts {
        for y in values(x)? {
            let violation = c.violation(&y);
            if violation > RANGE_TOL {
                return Err(Error::Domain(format!(
                    "value {y} at {x} lies outside the set (violation {violation:e})"
                )));
            }
        }
    }
    Ok(())
}

pub fn solve_brouwer(c: &ConvexCompactSet, f: &MapOracle, cfg: &SolverConfig) -> Result<FixedPointResult> {
    Error::check_dim(c.dim(), f.dim())?;
    check_range(c, |x| Ok(vec![f.eval(x)?]), cfg.seed)?;
    brouwer_from(c, f, cfg, &[])
}

fn brouwer_from(c: &ConvexCompactSet, f: &MapOracle, cfg: &SolverConfig, warm: &[Vector]) -> Result<FixedPointResult> {
    let g = f.displacement();
    let s = solve_with(c, &g, cfg, true, warm)?;
    let value = f.eval(&s.point)?;
    Ok(FixedPointResult {
        gap: value.dist(&s.point),
        hs_residual: s.residual,
        point: s.point,
        value,
        iterations: s.iterations,
        method: format!("{:?}", s.method).to_lowercase(),
        epsilon_final: None,
        steps: Vec::new(),
        branch_mixture: None,
        trace: s.trace,
    })
}

pub fn solve_kakutani(c: &ConvexCompactSet, zeta: &CorrespondenceOracle, cfg: &SolverConfig) -> Result<FixedPointResult> {
    Error::check_dim(c.dim(), zeta.dim())?;
    check_range(c, |x| zeta.values(x), cfg.seed)?;
    let solve = |f: &MapOracle, warm: &[Vector]| -> Result<(Vector, usize)> {
        let r = brouwer_from(c, f, cfg, warm)?;
        Ok((r.point, r.iterations))
    };
    let score = |x: &Vector, _cand: &Vector| -> Result<(Vector, f64, f64)> {
        let w = nearest_in_value(zeta, x, x)?;
        let res = residual_of(c, x, &(&w - x))?;
        Ok((w.clone(), res, w.dist(x)))
    };
    let out = epsilon_scheme(c, zeta, cfg, &solve, &score)?;
    Ok(FixedPointResult {
        point: out.point,
        value: out.witness,
        gap: out.gap,
        hs_residual: out.residual,
        iterations: out.iterations,
        method: if out.mixture.is_some() {
            "epsilon-scheme/frozen-mixture".into()
        } else {
            "epsilon-scheme".into()
        },
        epsilon_final: Some(out.epsilon),
        trace: out.steps.iter().map(TraceEntry::from_step).collect(),
        steps: out.steps,
        branch_mixture: out.mixture,
    })
}

//! Equilibrium prices: `ζ(p̄) ∩ R^N_- ≠ ∅` on the simplex, and
//! `ζ(p̄) ∩ P° ≠ ∅` on `B̄ ∩ P`.

use std::sync::Arc;

use super::walras::check_walras;
use super::{ConeCase, EquilibriumCertificate, WALRAS_SAMPLES};
use crate::approximation::correspondence_distance;
use crate::certificate::{Check, CertificateReport};
use crate::error::{Error, Result};
use crate::geometry::{ConvexCompactSet, PolyhedralCone, TAU_GEO};
use crate::maps::{CorrespondenceOracle, Evaluator, MapOracle};
use crate::retraction::RetractionMap;
use crate::vector::Vector;
use crate::vi_solver::{solve_hs, solve_hs_correspondence, SolverConfig, TraceEntry};

struct HsOutcome {
    point: Vector,
    witness: Vector,
    residual: f64,
    method: String,
    epsilon_final: Option<f64>,
    iterations: usize,
    trace: Vec<TraceEntry>,
}

/// Solves the HS problem on `k`, taking the map path for a single branch.
fn solve(k: &ConvexCompactSet, zeta: &CorrespondenceOracle, cfg: &SolverConfig) -> Result<HsOutcome> {
    match zeta.branches() {
        Some([f]) => {
            let s = solve_hs(k, f, cfg)?;
            Ok(HsOutcome {
                point: s.point,
                witness: s.value,
                residual: s.residual,
                method: format!("{:?}", s.method).to_lowercase(),
                epsilon_final: None,
                iterations: s.iterations,
                trace: s.trace,
            })
        }
        _ => {
            let s = solve_hs_correspondence(k, zeta, cfg)?;
            Ok(HsOutcome {
                point: s.point,
                witness: s.witness,
                residual: s.residual,
                method: if s.branch_mixture.is_some() {
                    "epsilon-scheme/frozen-mixture".into()
                } else {
                    "epsilon-scheme".into()
                },
                epsilon_final: Some(s.epsilon_final),
                iterations: s.iterations,
                trace: s.steps.iter().map(TraceEntry::from_step).collect(),
            })
        }
    }
}

/// Equilibrium on the price simplex. With `weak_form`, each value is first
/// restricted to `{z : <p, z> <= 0}`.
pub fn solve_gnd(zeta: &CorrespondenceOracle, cfg: &SolverConfig, weak_form: bool) -> Result<EquilibriumCertificate> {
    let k = ConvexCompactSet::simplex(zeta.dim())?;
    let used = if weak_form {
        zeta.clone().walras_filtered()
    } else {
        zeta.clone()
    };
    let out = solve(&k, &used, cfg)?;
    let value = out.point.dot(&out.witness);
    if value > cfg.tol {
        return Err(Error::HypothesisViolated(format!(
            "<p, z> = {value:e} > {:e} at the HS solution p = {}",
            cfg.tol, out.point
        )));
    }
    let walras = check_walras(&k, &used, WALRAS_SAMPLES, cfg.seed)?;
    let report = certify_simplex(&used, &out.point, &out.witness, cfg.tol);
    Ok(EquilibriumCertificate {
        cone_case: ConeCase::Simplex,
        price: out.point.clone(),
        witness: out.witness.clone(),
        hs_point: out.point,
        hs_residual: out.residual,
        walras_value: value,
        walras_check: walras.max,
        target_gap: out.witness.max_coord(),
        membership_gap: report.get("membership_gap").map_or(f64::INFINITY, |c| c.value),
        retraction_witness: None,
        epsilon_final: out.epsilon_final,
        method: out.method,
        iterations: out.iterations,
        tol: cfg.tol,
        warnings: Vec::new(),
        report,
        trace: out.trace,
    })
}

/// Recomputes the simplex certificate from the raw oracle.
pub fn certify_simplex(zeta: &CorrespondenceOracle, price: &Vector, witness: &Vector, tol: f64) -> CertificateReport {
    let Ok(k) = ConvexCompactSet::simplex(zeta.dim()) else {
        return CertificateReport::new(vec![Check::at_most("dimension", f64::INFINITY, 0.0)]);
    };
    if price.dim() != k.dim() || witness.dim() != k.dim() {
        return CertificateReport::new(vec![Check::at_most("dimension", f64::INFINITY, 0.0)]);
    }
    let gap = correspondence_distance(zeta, price, witness).unwrap_or(f64::INFINITY);
    CertificateReport::new(vec![
        Check::at_most("price_membership", k.violation(price), TAU_GEO),
        Check::at_most("membership_gap", gap, 10.0 * tol),
        Check::at_most("target_gap", witness.max_coord(), 10.0 * tol),
    ])
}

/// `ζ∘r` branch by branch.
fn compose_with_retraction(zeta: &CorrespondenceOracle, r: &RetractionMap) -> Result<CorrespondenceOracle> {
    let branches = zeta
        .branches()
        .ok_or_else(|| Error::InvalidConfig("cone equilibria need a branch-based correspondence".into()))?;
    let dim = r.dim();
    let composed = branches
        .iter()
        .map(|b| {
            let r = r.clone();
            let inner: Arc<Evaluator> = Arc::new(move |x: &[f64]| {
                r.retract_unchecked(&Vector::raw(x.to_vec()))
                    .map(Vector::into_inner)
                    .unwrap_or_else(|_| vec![f64::NAN; dim])
            });
            b.compose(inner, "retraction")
        })
        .collect::<Vec<MapOracle>>();
    CorrespondenceOracle::new(composed)
}

/// Equilibrium on `B̄ ∩ P`. For a cone that is not a subspace the problem is
/// solved for `ζ∘r` and the reported price is `r(x̄)`, a unit vector.
pub fn solve_gnd_general(
    cone: &PolyhedralCone,
    zeta: &CorrespondenceOracle,
    cfg: &SolverConfig,
) -> Result<EquilibriumCertificate> {
    Error::check_dim(cone.dim(), zeta.dim())?;
    let k = ConvexCompactSet::ball_cap_cone(cone.clone());
    let mut warnings = Vec::new();
    let (case, out, price, retraction) = if cone.is_subspace() {
        let out = solve(&k, zeta, cfg)?;
        let price = out.point.clone();
        (ConeCase::Subspace, out, price, None)
    } else {
        let r = RetractionMap::new(cone.clone())?;
        let composed = compose_with_retraction(zeta, &r)?;
        let out = solve(&k, &composed, cfg)?;
        let price = r.retract_unchecked(&out.point)?;
        (ConeCase::ProperCone, out, price, Some(r.witness().clone()))
    };
    let value = price.dot(&out.witness);
    if value > cfg.tol {
        return Err(Error::HypothesisViolated(format!(
            "<p, z> = {value:e} > {:e} at p = {price}",
            cfg.tol
        )));
    }
    if case == ConeCase::Subspace && price.norm() < cfg.tol {
        warnings.push(format!(
            "degenerate price: |p| = {:e} is below tolerance; the subspace case admits p = 0",
            price.norm()
        ));
    }
    let walras = check_walras(&k, zeta, WALRAS_SAMPLES, cfg.seed)?;
    let report = certify_cone(cone, zeta, &price, &out.witness, case, cfg.tol);
    Ok(EquilibriumCertificate {
        cone_case: case,
        price,
        witness: out.witness.clone(),
        hs_point: out.point,
        hs_residual: out.residual,
        walras_value: value,
        walras_check: walras.max,
        target_gap: cone.polar_violation(&out.witness),
        membership_gap: report.get("membership_gap").map_or(f64::INFINITY, |c| c.value),
        retraction_witness: retraction,
        epsilon_final: out.epsilon_final,
        method: out.method,
        iterations: out.iterations,
        tol: cfg.tol,
        warnings,
        report,
        trace: out.trace,
    })
}

/// Recomputes the cone certificate from the raw oracle.
pub fn certify_cone(
    cone: &PolyhedralCone,
    zeta: &CorrespondenceOracle,
    price: &Vector,
    witness: &Vector,
    case: ConeCase,
    tol: f64,
) -> CertificateReport {
    if price.dim() != cone.dim() || witness.dim() != cone.dim() || zeta.dim() != cone.dim() {
        return CertificateReport::new(vec![Check::at_most("dimension", f64::INFINITY, 0.0)]);
    }
    let k = ConvexCompactSet::ball_cap_cone(cone.clone());
    let gap = correspondence_distance(zeta, price, witness).unwrap_or(f64::INFINITY);
    let mut checks = vec![
        Check::at_most("price_membership", k.violation(price), TAU_GEO),
        Check::at_most("membership_gap", gap, 10.0 * tol),
        Check::at_most("polar_gap", cone.polar_violation(witness), 10.0 * tol),
    ];
    if case == ConeCase::ProperCone {
        checks.push(Check::at_most("unit_price", (price.norm() - 1.0).abs(), 1e-6));
    }
    CertificateReport::new(checks)
}

//! Empirical check of the supporting lemma: if `z ∈ ζ(x)`, the value
//! condition holds on `S ∩ P`, and `<p, z> <= <x, z>` on `B̄ ∩ P`, then
//! `z ∈ P°`.

use serde::{Deserialize, Serialize};

use super::walras::check_walras;
use crate::approximation::correspondence_distance;
use crate::certificate::{Check, CertificateReport};
use crate::error::Result;
use crate::geometry::{ConvexCompactSet, PolyhedralCone};
use crate::maps::CorrespondenceOracle;
use crate::vector::Vector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportingLemmaReport {
    pub report: CertificateReport,
    pub hypotheses_hold: bool,
    pub conclusion_holds: bool,
    /// `false` only if the hypotheses pass while the conclusion fails.
    pub implication_holds: bool,
}

pub fn verify_supporting_lemma(
    cone: &PolyhedralCone,
    zeta: &CorrespondenceOracle,
    x: &Vector,
    z: &Vector,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<SupportingLemmaReport> {
    let k = ConvexCompactSet::ball_cap_cone(cone.clone());
    k.ensure_member(x, crate::geometry::TAU_GEO)?;
    let gap = correspondence_distance(zeta, x, z)?;
    let sphere = check_walras(&k, zeta, samples, seed)?;
    let xz = x.dot(z);
    let sampled = k
        .sample(samples, seed ^ 0x5a5a)
        .iter()
        .map(|p| p.dot(z) - xz)
        .fold(f64::NEG_INFINITY, f64::max);
    let support = k.support_max(z)?.value - xz;
    let polar = cone.polar_violation(z);

    let hyp = vec![
        Check::at_most("value_membership", gap, tol),
        Check::at_most("sphere_condition", sphere.max, tol),
        Check::at_most("hs_sampled", sampled, tol),
        Check::at_most("hs_support", support, tol),
    ];
    let hypotheses_hold = hyp.iter().all(|c| c.passed);
    let conclusion = Check::at_most("polar_membership", polar, tol);
    let conclusion_holds = conclusion.passed;
    let mut checks = hyp;
    checks.push(conclusion);
    Ok(SupportingLemmaReport {
        report: CertificateReport::new(checks),
        hypotheses_hold,
        conclusion_holds,
        implication_holds: !hypotheses_hold || conclusion_holds,
    })
}

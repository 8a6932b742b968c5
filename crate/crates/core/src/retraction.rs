//! Retraction of `B̄ ∩ P` onto the sphere slice `S ∩ P` for a cone `P` that
//! is not a linear subspace.
//!
//! Points are pushed away from a witness `a ∈ P° ∩ (-P)`, `a ∉ P`, along
//! the ray `x + λ(x - a)` until they reach the unit sphere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PolyhedralCone, TAU_GEO};
use crate::vector::Vector;

pub fn is_subspace(cone: &PolyhedralCone) -> bool {
    cone.is_subspace()
}

/// Picks the first generator `x` with `-x ∉ P` and returns the unit vector
/// along `π_{-P}(x) - x`.
pub fn find_polar_vector(cone: &PolyhedralCone) -> Result<Vector> {
    let neg = cone.negated();
    for x in cone.generators() {
        if cone.contains(&-x, TAU_GEO) {
            continue;
        }
        let y = neg.project(x)?.point;
        let Some(a) = (&y - x).normalized() else {
            continue;
        };
        if check_witness(cone, &a).is_ok() {
            return Ok(a);
        }
    }
    if cone.is_subspace() {
        Err(Error::SubspaceCone)
    } else {
        Err(Error::InvalidCone("no generator yields a valid polar witness".into()))
    }
}

fn check_witness(cone: &PolyhedralCone, a: &Vector) -> Result<()> {
    Error::check_dim(cone.dim(), a.dim())?;
    if a.norm() <= TAU_GEO {
        return Err(Error::InvalidCone("witness must be nonzero".into()));
    }
    let scale = a.norm();
    if cone.polar_violation(a) > TAU_GEO * scale {
        return Err(Error::InvalidCone("witness is not in the polar cone".into()));
    }
    if cone.violation(&-a) > TAU_GEO * scale {
        return Err(Error::InvalidCone("negated witness is not in the cone".into()));
    }
    if cone.violation(a) <= TAU_GEO * scale {
        return Err(Error::InvalidCone("witness lies in the cone".into()));
    }
    Ok(())
}

/// `r(x) = x + λ(x)(x - a)`, continuous from `B̄ ∩ P` onto `S ∩ P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetractionMap {
    cone: PolyhedralCone,
    a: Vector,
}

impl RetractionMap {
    /// Uses the witness from [`find_polar_vector`].
    pub fn new(cone: PolyhedralCone) -> Result<Self> {
        if cone.is_subspace() {
            return Err(Error::SubspaceCone);
        }
        let a = find_polar_vector(&cone)?;
        Ok(Self { cone, a })
    }

    /// Uses a caller-supplied witness, which is validated but not rescaled.
    pub fn with_witness(cone: PolyhedralCone, a: Vector) -> Result<Self> {
        if cone.is_subspace() {
            return Err(Error::SubspaceCone);
        }
        check_witness(&cone, &a)?;
        Ok(Self { cone, a })
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    pub fn cone(&self) -> &PolyhedralCone {
        &self.cone
    }

    pub fn witness(&self) -> &Vector {
        &self.a
    }

    fn check_domain(&self, x: &Vector) -> Result<()> {
        Error::check_dim(self.dim(), x.dim())?;
        let violation = (x.norm() - 1.0).max(0.0).max(self.cone.violation(x));
        if violation > TAU_GEO {
            return Err(Error::PointNotInSet { violation, tol: TAU_GEO });
        }
        Ok(())
    }

    /// The nonnegative root of `|x + λ(x - a)| = 1`.
    pub fn lambda_coefficient(&self, x: &Vector) -> Result<f64> {
        self.check_domain(x)?;
        self.lambda_unchecked(x)
    }

    fn lambda_unchecked(&self, x: &Vector) -> Result<f64> {
        let d = x - &self.a;
        let dd = d.norm_sq();
        if dd.sqrt() < TAU_GEO {
            return Err(Error::DegenerateDirection(dd.sqrt()));
        }
        let q = x.dot(&d);
        let c = (1.0 - x.norm_sq()).max(0.0);
        let root = (q * q + c * dd).sqrt();
        let lambda = if q > 0.0 { c / (q + root) } else { (root - q) / dd };
        Ok(lambda.max(0.0))
    }

    pub fn retract(&self, x: &Vector) -> Result<Vector> {
        self.check_domain(x)?;
        let lambda = self.lambda_unchecked(x)?;
        Ok(x.axpy(lambda, &(x - &self.a)))
    }

    /// `retract` without the domain check, for points produced by the solver's
    /// own projections.
    pub(crate) fn retract_unchecked(&self, x: &Vector) -> Result<Vector> {
        let lambda = self.lambda_unchecked(x)?;
        Ok(x.axpy(lambda, &(x - &self.a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    fn orthant_with(a: &[f64]) -> RetractionMap {
        RetractionMap::with_witness(PolyhedralCone::orthant(2).unwrap(), v(a)).unwrap()
    }

    #[test]
    fn subspace_examples() {
        assert!(!is_subspace(&PolyhedralCone::orthant(2).unwrap()));
        assert!(is_subspace(&PolyhedralCone::whole_space(2).unwrap()));
        let line = PolyhedralCone::from_generators(2, vec![v(&[1.0, 1.0]), v(&[-1.0, -1.0])]).unwrap();
        assert!(is_subspace(&line));
    }

    #[test]
    fn polar_vector_examples() {
        let a = find_polar_vector(&PolyhedralCone::orthant(2).unwrap()).unwrap();
        // hand computation: π_{R²₋}((1,0)) = 0, so a = (-1, 0)
        assert!(a.dist(&v(&[-1.0, 0.0])) < 1e-12);
        let ray = PolyhedralCone::ray(v(&[1.0, 0.0])).unwrap();
        assert!(find_polar_vector(&ray).unwrap().dist(&v(&[-1.0, 0.0])) < 1e-12);
        assert!(matches!(
            find_polar_vector(&PolyhedralCone::whole_space(2).unwrap()),
            Err(Error::SubspaceCone)
        ));
        assert!(matches!(
            RetractionMap::new(PolyhedralCone::whole_space(3).unwrap()),
            Err(Error::SubspaceCone)
        ));
    }

    #[test]
    fn lambda_examples() {
        let r = orthant_with(&[-1.0, -1.0]);
        let lambda = r.lambda_coefficient(&v(&[0.0, 0.0])).unwrap();
        assert!((lambda - 0.5f64.sqrt()).abs() < 1e-14);
        assert_eq!(r.lambda_coefficient(&v(&[1.0, 0.0])).unwrap(), 0.0);

        let r = orthant_with(&[-1.0, 0.0]);
        let x = v(&[0.0, 0.5]);
        let lambda = r.lambda_coefficient(&x).unwrap();
        // bisection on |x + λ(x - a)| - 1 over [0, 10]
        let d = &x - &v(&[-1.0, 0.0]);
        let (mut lo, mut hi) = (0.0f64, 10.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if x.axpy(mid, &d).norm() < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(lambda > 0.0);
        assert!((lambda - lo).abs() < 1e-12);
    }

    #[test]
    fn retract_examples() {
        let r = orthant_with(&[-1.0, -1.0]);
        let h = 0.5f64.sqrt();
        assert!(r.retract(&v(&[0.0, 0.0])).unwrap().dist(&v(&[h, h])) < 1e-14);
        assert!(r.retract(&v(&[0.3, 0.3])).unwrap().dist(&v(&[h, h])) < 1e-14);
        assert_eq!(r.retract(&v(&[1.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
        assert!(matches!(r.retract(&v(&[-0.5, 0.0])), Err(Error::PointNotInSet { .. })));
    }

    #[test]
    fn rejects_bad_witness() {
        let p = PolyhedralCone::orthant(2).unwrap();
        assert!(RetractionMap::with_witness(p.clone(), v(&[1.0, 0.0])).is_err());
        assert!(RetractionMap::with_witness(p.clone(), v(&[0.0, 0.0])).is_err());
        assert!(RetractionMap::with_witness(p, v(&[-1.0, 0.5])).is_err());
    }
}

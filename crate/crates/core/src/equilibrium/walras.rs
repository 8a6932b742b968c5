use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexCompactSet;
use crate::maps::CorrespondenceOracle;
use crate::vector::Vector;

/// Largest sampled value of `<p, z>` with `z` a vertex of `ζ(p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalrasReport {
    pub max: f64,
    pub price: Vector,
    pub value: Vector,
    pub samples: usize,
}

impl WalrasReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max <= tol
    }
}

/// Price points on which the value condition is stated: the simplex itself,
/// or the unit sphere (intersected with the cone) for ball domains.
pub fn walras_prices(domain: &ConvexCompactSet, samples: usize, seed: u64) -> Vec<Vector> {
    match domain {
        ConvexCompactSet::Simplex { .. } => domain.sample(samples.max(1), seed),
        ConvexCompactSet::Ball { dim } => {
            let mut out = Vec::with_capacity(samples + 2 * dim);
            for i in 0..*dim {
                out.push(Vector::basis(*dim, i));
                out.push(-&Vector::basis(*dim, i));
            }
            out.extend(domain.sample(samples, seed).iter().filter_map(Vector::normalized));
            out
        }
        ConvexCompactSet::BallCapCone { cone } => {
            let mut out: Vec<Vector> = cone.generators().to_vec();
            out.extend(domain.sample(samples, seed).iter().filter_map(Vector::normalized));
            out
        }
    }
}

pub fn check_walras(
    domain: &ConvexCompactSet,
    zeta: &CorrespondenceOracle,
    samples: usize,
    seed: u64,
) -> Result<WalrasReport> {
    Error::check_dim(domain.dim(), zeta.dim())?;
    let prices = walras_prices(domain, samples, seed);
    let mut report = WalrasReport {
        max: f64::NEG_INFINITY,
        price: Vector::zeros(domain.dim()),
        value: Vector::zeros(domain.dim()),
        samples: prices.len(),
    };
    for p in &prices {
        for z in zeta.values(p)? {
            let s = p.dot(&z);
            if s > report.max {
                report.max = s;
                report.price = p.clone();
                report.value = z;
            }
        }
    }
    if prices.is_empty() {
        report.max = 0.0;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MapOracle;
    use crate::geometry::PolyhedralCone;

    #[test]
    fn examples() {
        let d = ConvexCompactSet::simplex(2).unwrap();
        let swap = MapOracle::new(2, "swap", |p| vec![p[1] - p[0], p[0] - p[1]]);
        let r = check_walras(&d, &CorrespondenceOracle::from_map(swap), 200, 0).unwrap();
        assert!(r.max.abs() < 1e-15);

        let sphere = ConvexCompactSet::ball_cap_cone(PolyhedralCone::whole_space(2).unwrap());
        let r = check_walras(&sphere, &CorrespondenceOracle::from_map(MapOracle::neg_identity(2)), 200, 1)
            .unwrap();
        assert!((r.max + 1.0).abs() < 1e-12);

        let id = MapOracle::new(2, "id", |p| p.to_vec());
        let r = check_walras(&d, &CorrespondenceOracle::from_map(id), 200, 0).unwrap();
        assert_eq!(r.max, 1.0);
        assert!(r.price.norm_inf() == 1.0);
    }
}

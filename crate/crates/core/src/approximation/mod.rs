//! Continuous approximation of polytope-valued correspondences: finite
//! coverings, hat-function partitions of unity, and Carathéodory reduction.

mod caratheodory;
mod polytope;

pub use caratheodory::{caratheodory_reduce, CaratheodoryDecomposition};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::geometry::ConvexCompactSet;
use crate::maps::{CorrespondenceOracle, MapOracle};
use crate::vector::Vector;

/// Default limit on the number of covering centers.
pub const DEFAULT_CENTER_CAP: usize = 100_000;

/// Probe sample size used to certify coverage.
pub const COVERING_PROBES: usize = 10_000;

/// Probes are covered at this fraction of the radius so that points between
/// probes still fall strictly inside some ball.
const COVER_MARGIN: f64 = 0.75;

/// Balls `B(x^i, r)` whose union contains the set.
#[derive(Clone, Debug, PartialEq)]
pub struct Covering {
    centers: Vec<Vector>,
    radius: f64,
}

impl Covering {
    /// Greedy farthest-point covering checked against a seeded probe sample.
    pub fn build(k: &ConvexCompactSet, radius: f64, seed: u64) -> Result<Self> {
        Self::build_with_cap(k, radius, seed, DEFAULT_CENTER_CAP)
    }

    pub fn build_with_cap(k: &ConvexCompactSet, radius: f64, seed: u64, cap: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("covering radius must be positive, got {radius}")));
        }
        let probes = k.sample(COVERING_PROBES, seed);
        let target = COVER_MARGIN * radius;
        let mut centers = vec![k.center()];
        let mut dist: Vec<f64> = probes.iter().map(|p| p.dist(&centers[0])).collect();
        loop {
            let (far, d) = dist
                .iter()
                .copied()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("probe sample is nonempty");
            if d <= target {
                break;
            }
            if centers.len() >= cap {
                return Err(Error::RadiusTooSmall { radius, cap });
            }
            let c = probes[far].clone();
            for (di, p) in dist.iter_mut().zip(&probes) {
                *di = di.min(p.dist(&c));
            }
            centers.push(c);
        }
        Ok(Self { centers, radius })
    }

    /// A covering with explicitly chosen centers.
    pub fn from_centers(centers: Vec<Vector>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("covering radius must be positive, got {radius}")));
        }
        let first = centers
            .first()
            .ok_or_else(|| Error::InvalidConfig("covering needs at least one center".into()))?;
        let dim = first.dim();
        for c in &centers {
            Error::check_dim(dim, c.dim())?;
        }
        Ok(Self { centers, radius })
    }

    pub fn centers(&self) -> &[Vector] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].dim()
    }
}

/// Hat functions `max(0, r - |x - x^i|)`, normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOfUnity {
    covering: Covering,
}

impl PartitionOfUnity {
    pub fn new(covering: Covering) -> Self {
        Self { covering }
    }

    pub fn covering(&self) -> &Covering {
        &self.covering
    }

    pub fn weights(&self, x: &Vector) -> Result<Vec<f64>> {
        Error::check_dim(self.covering.dim(), x.dim())?;
        let r = self.covering.radius;
        let mut w: Vec<f64> = self
            .covering
            .centers
            .iter()
            .map(|c| (r - x.dist(c)).max(0.0))
            .collect();
        let s: f64 = w.iter().sum();
        if s <= 0.0 {
            return Err(Error::UncoveredPoint);
        }
        w.iter_mut().for_each(|a| *a /= s);
        Ok(w)
    }

    /// Nonzero weights as `(center index, weight)` pairs.
    pub fn active(&self, x: &Vector) -> Result<Vec<(usize, f64)>> {
        Ok(self
            .weights(x)?
            .into_iter()
            .enumerate()
            .filter(|(_, w)| *w > 0.0)
            .collect())
    }
}

/// `f(x) = Σ α_i(x) y^i` with one selection `y^i ∈ ζ(x^i)` per center.
#[derive(Clone, Debug)]
pub struct ApproxMap {
    partition: PartitionOfUnity,
    selections: Vec<Vector>,
    mixtures: Option<Vec<Vec<f64>>>,
}

impl ApproxMap {
    pub fn partition(&self) -> &PartitionOfUnity {
        &self.partition
    }

    pub fn selections(&self) -> &[Vector] {
        &self.selections
    }

    /// Branch weights defining each selection, when `ζ` is branch-based.
    pub fn mixtures(&self) -> Option<&[Vec<f64>]> {
        self.mixtures.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.partition.covering.dim()
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        let w = self.partition.weights(x)?;
        Ok(Vector::combination(self.dim(), &self.selections, &w))
    }

    /// `f(x)` as a combination of at most `N + 1` selections.
    pub fn decompose(&self, x: &Vector) -> Result<CaratheodoryDecomposition> {
        let active = self.partition.active(x)?;
        let pts: Vec<Vector> = active.iter().map(|&(i, _)| self.selections[i].clone()).collect();
        let w: Vec<f64> = active.iter().map(|&(_, a)| a).collect();
        let mut d = caratheodory_reduce(&pts, &w)?;
        d.indices = d.indices.iter().map(|&k| active[k].0).collect();
        Ok(d)
    }

    /// Wraps the map as an oracle. Points outside the covering evaluate to
    /// the selection of the nearest center.
    pub fn to_map_oracle(&self) -> MapOracle {
        let me = self.clone();
        MapOracle::new(self.dim(), format!("approx(r={})", self.partition.covering.radius), move |x| {
            let x = Vector::raw(x.to_vec());
            match me.eval(&x) {
                Ok(v) => v.into_inner(),
                Err(_) => {
                    let nearest = me
                        .partition
                        .covering
                        .centers
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.dist(&x).total_cmp(&b.1.dist(&x)))
                        .map(|(i, _)| i)
                        .unwrap();
                    me.selections[nearest].clone().into_inner()
                }
            }
        })
    }
}

pub fn build_covering(k: &ConvexCompactSet, radius: f64, seed: u64) -> Result<Covering> {
    Covering::build(k, radius, seed)
}

pub fn partition_weights(pu: &PartitionOfUnity, x: &Vector) -> Result<Vec<f64>> {
    pu.weights(x)
}

/// Builds the approximation with seeded random selections: at each center
/// the selection is a Dirichlet(1, ..., 1) mixture of the vertex values.
pub fn approximate_map(zeta: &CorrespondenceOracle, pu: PartitionOfUnity, seed: u64) -> Result<ApproxMap> {
    Error::check_dim(zeta.dim(), pu.covering.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let branch_based = zeta.branches().is_some();
    let mut selections = Vec::with_capacity(pu.covering.len());
    let mut mixtures = Vec::with_capacity(pu.covering.len());
    for c in &pu.covering.centers {
        let vals = zeta.values(c)?;
        let mut w: Vec<f64> = (0..vals.len()).map(|_| Exp1.sample(&mut rng)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        selections.push(Vector::combination(zeta.dim(), &vals, &w));
        mixtures.push(w);
    }
    Ok(ApproxMap {
        partition: pu,
        selections,
        mixtures: branch_based.then_some(mixtures),
    })
}

/// Distance from `z` to the polytope `ζ(x)`.
pub fn correspondence_distance(zeta: &CorrespondenceOracle, x: &Vector, z: &Vector) -> Result<f64> {
    Ok(nearest_in_value(zeta, x, z)?.dist(z))
}

/// Nearest point of `ζ(x)` to `z`.
pub fn nearest_in_value(zeta: &CorrespondenceOracle, x: &Vector, z: &Vector) -> Result<Vector> {
    Error::check_dim(zeta.dim(), z.dim())?;
    let vals = zeta.values(x)?;
    Ok(polytope::nearest_point(&vals, z).0)
}

/// Nearest point of `conv(vertices)` to `z` and its convex weights.
pub fn polytope_nearest(vertices: &[Vector], z: &Vector) -> Result<(Vector, Vec<f64>)> {
    if vertices.is_empty() {
        return Err(Error::InvalidConfig("empty vertex list".into()));
    }
    for v in vertices {
        Error::check_dim(z.dim(), v.dim())?;
    }
    Ok(polytope::nearest_point(vertices, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    #[test]
    fn covering_examples() {
        let simplex = ConvexCompactSet::simplex(2).unwrap();
        let c = Covering::build(&simplex, 1.0, 0).unwrap();
        assert_eq!(c.len(), 1);
        for p in simplex.sample(1000, 9) {
            assert!(p.dist(&c.centers()[0]) < 1.0);
        }

        let segment = ConvexCompactSet::ball(1).unwrap();
        let c = Covering::build(&segment, 0.6, 0).unwrap();
        // one ball of radius 0.6 cannot cover an interval of length 2
        assert!(c.len() >= 2);

        let ball = ConvexCompactSet::ball(3).unwrap();
        assert_eq!(Covering::build(&ball, ball.diameter(), 4).unwrap().len(), 1);
        assert!(matches!(
            Covering::build_with_cap(&ball, 0.01, 0, 50),
            Err(Error::RadiusTooSmall { cap: 50, .. })
        ));
    }

    #[test]
    fn partition_examples() {
        let cov = Covering::from_centers(vec![v(&[0.0, 0.0]), v(&[5.0, 0.0])], 1.0).unwrap();
        let pu = PartitionOfUnity::new(cov);
        assert_eq!(pu.weights(&v(&[0.0, 0.0])).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(pu.weights(&v(&[2.5, 0.0])), Err(Error::UncoveredPoint)));

        let cov = Covering::from_centers(vec![v(&[0.0]), v(&[1.0])], 1.0).unwrap();
        let pu = PartitionOfUnity::new(cov);
        assert_eq!(pu.weights(&v(&[0.5])).unwrap(), vec![0.5, 0.5]);

        // raw hats 0.3, 0.1, 0 at x = 0
        let cov = Covering::from_centers(vec![v(&[0.7]), v(&[-0.9]), v(&[3.0])], 1.0).unwrap();
        let w = PartitionOfUnity::new(cov).weights(&v(&[0.0])).unwrap();
        assert!((w[0] - 0.75).abs() < 1e-14 && (w[1] - 0.25).abs() < 1e-14 && w[2] == 0.0);
    }

    #[test]
    fn approx_of_constant_segment_stays_in_segment() {
        let zeta = CorrespondenceOracle::constant(vec![v(&[-1.0, 0.0]), v(&[0.0, -1.0])]).unwrap();
        let k = ConvexCompactSet::simplex(2).unwrap();
        let pu = PartitionOfUnity::new(Covering::build(&k, 0.2, 1).unwrap());
        let f = approximate_map(&zeta, pu, 3).unwrap();
        for x in k.sample(200, 5) {
            let y = f.eval(&x).unwrap();
            let d = correspondence_distance(&zeta, &x, &y).unwrap();
            assert!(d < 1e-12, "{x:?} {y:?} {d}");
        }
    }

    #[test]
    fn approx_error_against_branch_polytope() {
        // ζ(x) = conv{-x, -x + (0, 1)}, Lipschitz 1 in x
        let f1 = MapOracle::neg_identity(2);
        let f2 = MapOracle::new(2, "shifted", |x| vec![-x[0], 1.0 - x[1]]);
        let zeta = CorrespondenceOracle::new(vec![f1, f2]).unwrap();
        let k = ConvexCompactSet::simplex(2).unwrap();
        let pu = PartitionOfUnity::new(Covering::build(&k, 0.1, 2).unwrap());
        let f = approximate_map(&zeta, pu, 7).unwrap();
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            let x = v(&[t, 1.0 - t]);
            let y = f.eval(&x).unwrap();
            // nearest point of the segment by direct parameter search
            let (a, b) = (v(&[-t, t - 1.0]), v(&[-t, t]));
            let d = (0..=2000)
                .map(|j| a.axpy(j as f64 / 2000.0, &(&b - &a)).dist(&y))
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 0.1 + 1e-8, "t={t}: {d}");
            assert!((correspondence_distance(&zeta, &x, &y).unwrap() - d).abs() < 1e-3);
        }
    }

    #[test]
    fn correspondence_distance_examples() {
        let f = MapOracle::neg_identity(2);
        let single = CorrespondenceOracle::from_map(f.clone());
        let x = v(&[0.3, 0.7]);
        assert_eq!(correspondence_distance(&single, &x, &f.eval(&x).unwrap()).unwrap(), 0.0);
        let seg = CorrespondenceOracle::constant(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0])]).unwrap();
        assert!((correspondence_distance(&seg, &x, &v(&[0.5, 1.0])).unwrap() - 1.0).abs() < 1e-14);
        assert!((correspondence_distance(&seg, &x, &v(&[2.0, 0.0])).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn decomposition_reproduces_value() {
        let zeta = CorrespondenceOracle::from_map(MapOracle::neg_identity(3));
        let k = ConvexCompactSet::simplex(3).unwrap();
        let f = approximate_map(&zeta, PartitionOfUnity::new(Covering::build(&k, 0.3, 0).unwrap()), 0).unwrap();
        for x in k.sample(50, 1) {
            let d = f.decompose(&x).unwrap();
            assert!(d.len() <= 4);
            assert!(d.target().dist(&f.eval(&x).unwrap()) < 1e-12);
            for (&i, p) in d.indices.iter().zip(&d.points) {
                assert_eq!(&f.selections()[i], p);
                assert!(x.dist(&f.partition().covering().centers()[i]) < 0.3);
            }
        }
    }
}

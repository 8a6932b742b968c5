use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::cone::PolyhedralCone;
use super::{ProjectionResult, TAU_GEO};
use crate::error::{Error, Result};
use crate::vector::Vector;

/// The three compact convex domains the solvers work on: the unit simplex
/// `Δ`, the closed unit ball `B̄`, and `B̄ ∩ P` for a polyhedral cone `P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConvexCompactSet {
    Simplex { dim: usize },
    Ball { dim: usize },
    BallCapCone { cone: PolyhedralCone },
}

/// Value and a maximizer of `v ↦ <v, c>` over a set.
#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    pub value: f64,
    pub argmax: Vector,
}

impl ConvexCompactSet {
    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("simplex dimension must be positive".into()));
        }
        Ok(Self::Simplex { dim })
    }

    pub fn ball(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("ball dimension must be positive".into()));
        }
        Ok(Self::Ball { dim })
    }

    pub fn ball_cap_cone(cone: PolyhedralCone) -> Self {
        Self::BallCapCone { cone }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Simplex { dim } | Self::Ball { dim } => *dim,
            Self::BallCapCone { cone } => cone.dim(),
        }
    }

    pub fn cone(&self) -> Option<&PolyhedralCone> {
        match self {
            Self::BallCapCone { cone } => Some(cone),
            _ => None,
        }
    }

    /// Dimension of the affine hull.
    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Self::Simplex { dim } => dim - 1,
            Self::Ball { dim } => *dim,
            Self::BallCapCone { cone } => cone.span_dim(),
        }
    }

    /// Upper bound on the diameter.
    pub fn diameter(&self) -> f64 {
        match self {
            Self::Simplex { dim } if *dim == 1 => 0.0,
            Self::Simplex { .. } => std::f64::consts::SQRT_2,
            Self::Ball { .. } => 2.0,
            Self::BallCapCone { cone } if cone.generators().is_empty() => 0.0,
            Self::BallCapCone { .. } => 2.0,
        }
    }

    /// A canonical interior-ish starting point.
    pub fn center(&self) -> Vector {
        match self {
            Self::Simplex { dim } => Vector::filled(*dim, 1.0 / *dim as f64),
            Self::Ball { dim } => Vector::zeros(*dim),
            Self::BallCapCone { cone } => {
                let sum = cone
                    .generators()
                    .iter()
                    .fold(Vector::zeros(cone.dim()), |acc, g| &acc + g);
                sum.normalized()
                    .map(|u| u.scaled(0.5))
                    .unwrap_or_else(|| Vector::zeros(cone.dim()))
            }
        }
    }

    /// How far `x` is from satisfying the set's defining constraints.
    pub fn violation(&self, x: &Vector) -> f64 {
        match self {
            Self::Simplex { .. } => {
                let sum: f64 = x.iter().sum();
                let neg = x.iter().fold(0.0f64, |m, c| m.max(-c));
                (sum - 1.0).abs().max(neg)
            }
            Self::Ball { .. } => (x.norm() - 1.0).max(0.0),
            Self::BallCapCone { cone } => (x.norm() - 1.0).max(0.0).max(cone.violation(x)),
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.dim() == self.dim() && self.violation(x) <= tol
    }

    pub(crate) fn ensure_member(&self, x: &Vector, tol: f64) -> Result<()> {
        Error::check_dim(self.dim(), x.dim())?;
        let violation = self.violation(x);
        if violation > tol {
            return Err(Error::PointNotInSet { violation, tol });
        }
        Ok(())
    }

    /// Euclidean projection `π_K(v)`.
    pub fn project(&self, v: &Vector) -> Result<ProjectionResult> {
        Error::check_dim(self.dim(), v.dim())?;
        let point = self.project_point(v);
        let distance = point.dist(v);
        Ok(ProjectionResult { point, distance })
    }

    pub(crate) fn project_point(&self, v: &Vector) -> Vector {
        match self {
            Self::Simplex { .. } => project_simplex(v),
            Self::Ball { .. } => project_ball(v),
            // For a cone with apex at the ball's center, π_{B̄∩P} = π_B̄ ∘ π_P.
            Self::BallCapCone { cone } => project_ball(&cone.project(v).expect("dim checked").point),
        }
    }

    /// Projection onto `B̄ ∩ P` by Dykstra alternation between the ball and
    /// the cone; stops once a sweep moves less than `1e-12` or after 10,000
    /// sweeps. Independent of the composition formula used by `project`.
    pub fn project_dykstra(&self, v: &Vector) -> Result<Vector> {
        Error::check_dim(self.dim(), v.dim())?;
        let Self::BallCapCone { cone } = self else {
            return Ok(self.project_point(v));
        };
        let n = self.dim();
        let mut x = v.clone();
        let mut p = Vector::zeros(n);
        let mut q = Vector::zeros(n);
        for _ in 0..10_000 {
            let y = project_ball(&(&x + &p));
            p = &(&x + &p) - &y;
            let next = cone.project(&(&y + &q))?.point;
            q = &(&y + &q) - &next;
            let moved = next.dist(&x);
            x = next;
            if moved < 1e-12 {
                break;
            }
        }
        Ok(x)
    }

    /// `max_{v ∈ K} <v, c>` with a maximizer.
    pub fn support_max(&self, c: &Vector) -> Result<Support> {
        Error::check_dim(self.dim(), c.dim())?;
        Ok(self.support_point(c))
    }

    pub(crate) fn support_point(&self, c: &Vector) -> Support {
        match self {
            Self::Simplex { dim } => {
                let (j, value) = c
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |(bj, bv), (j, v)| if v > bv { (j, v) } else { (bj, bv) });
                Support {
                    value,
                    argmax: Vector::basis(*dim, j),
                }
            }
            Self::Ball { dim } => match c.normalized() {
                Some(u) => Support {
                    value: c.norm(),
                    argmax: u,
                },
                None => Support {
                    value: 0.0,
                    argmax: Vector::zeros(*dim),
                },
            },
            Self::BallCapCone { cone } => {
                // Moreau: max over B̄∩P of <v, c> is |π_P(c)|.
                let proj = cone.project(c).expect("dim checked").point;
                let value = proj.norm();
                let argmax = proj.normalized().unwrap_or_else(|| Vector::zeros(cone.dim()));
                Support { value, argmax }
            }
        }
    }

    /// `max_{v ∈ K} <u, v - x>`; nonpositive exactly when `u ∈ N_K(x)`.
    pub fn normal_cone_residual(&self, x: &Vector, u: &Vector) -> Result<f64> {
        self.ensure_member(x, TAU_GEO)?;
        Error::check_dim(self.dim(), u.dim())?;
        Ok(self.support_point(u).value - u.dot(x))
    }

    /// Deterministic sample of points of the set.
    ///
    /// Simplex samples start with the vertices and the barycenter; cone
    /// samples start with the origin and the unit generators.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim();
        let mut out = Vec::with_capacity(count);
        match self {
            Self::Simplex { dim } => {
                for i in 0..*dim {
                    out.push(Vector::basis(*dim, i));
                }
                out.push(self.center());
                while out.len() < count {
                    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
                    let s: f64 = e.iter().sum();
                    out.push(Vector::raw(e.into_iter().map(|x| x / s).collect()));
                }
            }
            Self::Ball { .. } => {
                while out.len() < count {
                    out.push(uniform_ball(n, &mut rng));
                }
            }
            Self::BallCapCone { cone } => {
                out.push(Vector::zeros(n));
                out.extend(cone.generators().iter().cloned());
                while out.len() < count {
                    let y = uniform_ball(n, &mut rng).scaled(rng.random_range(1.0..3.0));
                    out.push(self.project_point(&y));
                }
            }
        }
        out.truncate(count);
        out
    }
}

pub(crate) fn uniform_ball(n: usize, rng: &mut impl Rng) -> Vector {
    loop {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let g = Vector::raw(g);
        if let Some(u) = g.normalized() {
            let r = rng.random::<f64>().powf(1.0 / n as f64);
            return u.scaled(r);
        }
    }
}

fn project_ball(v: &Vector) -> Vector {
    let n = v.norm();
    if n <= 1.0 {
        v.clone()
    } else {
        v.scaled(1.0 / n)
    }
}

/// Sort-and-threshold projection onto the unit simplex.
fn project_simplex(v: &Vector) -> Vector {
    let mut sorted: Vec<f64> = v.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    // renormalize rounding so the result sits on the hyperplane
    let s: f64 = out.iter().sum();
    if s > 0.0 {
        for x in &mut out {
            *x /= s;
        }
    }
    Vector::raw(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    /// Dense grid over Δ² minimizing the distance to `q`.
    fn grid_project_simplex2(q: &Vector) -> Vector {
        let n = 20_000;
        (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                v(&[t, 1.0 - t])
            })
            .min_by(|a, b| a.dist(q).total_cmp(&b.dist(q)))
            .unwrap()
    }

    #[test]
    fn simplex_projection_examples() {
        let k = ConvexCompactSet::simplex(2).unwrap();
        let r = k.project(&v(&[0.5, 0.5])).unwrap();
        assert_eq!(r.point, v(&[0.5, 0.5]));
        assert_eq!(r.distance, 0.0);
        let q = v(&[2.0, 0.0]);
        let r = k.project(&q).unwrap();
        let oracle = grid_project_simplex2(&q);
        assert!(oracle.dist(&v(&[1.0, 0.0])) < 1e-12);
        assert!(r.point.dist(&oracle) < 1e-12);
    }

    #[test]
    fn ball_projection_example() {
        let k = ConvexCompactSet::ball(2).unwrap();
        let r = k.project(&v(&[3.0, 4.0])).unwrap();
        assert!(r.point.dist(&v(&[0.6, 0.8])) < 1e-15);
        assert!((r.distance - 4.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let k = ConvexCompactSet::simplex(3).unwrap();
        assert!(matches!(k.project(&v(&[1.0])), Err(Error::Dimension { expected: 3, got: 1 })));
        assert!(k.support_max(&v(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn support_examples() {
        let k = ConvexCompactSet::simplex(3).unwrap();
        let s = k.support_max(&v(&[1.0, 5.0, 2.0])).unwrap();
        assert_eq!(s.value, 5.0);
        assert_eq!(s.argmax, v(&[0.0, 1.0, 0.0]));

        let cap = ConvexCompactSet::ball_cap_cone(PolyhedralCone::orthant(2).unwrap());
        let s = cap.support_max(&v(&[1.0, 1.0])).unwrap();
        assert!((s.value - 2f64.sqrt()).abs() < 1e-14);

        // oracle: grid over the quarter circle (the maximum sits on the arc)
        let c = v(&[1.0, -1.0]);
        let best = (0..=9000)
            .map(|i| {
                let t = i as f64 * std::f64::consts::FRAC_PI_2 / 9000.0;
                v(&[t.cos(), t.sin()])
            })
            .max_by(|a, b| a.dot(&c).total_cmp(&b.dot(&c)))
            .unwrap();
        assert!((best.dot(&c) - 1.0).abs() < 1e-12);
        let s = cap.support_max(&c).unwrap();
        assert!((s.value - 1.0).abs() < 1e-14);
        assert!(s.argmax.dist(&v(&[1.0, 0.0])) < 1e-14);
    }

    #[test]
    fn normal_cone_residual_examples() {
        let d = ConvexCompactSet::simplex(2).unwrap();
        let x = v(&[0.5, 0.5]);
        // grid check of max_v <u, v - x>
        let grid_max = |u: &Vector| {
            (0..=1000)
                .map(|i| {
                    let t = i as f64 / 1000.0;
                    u.dot(&(&v(&[t, 1.0 - t]) - &x))
                })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let u = v(&[-0.5, -0.5]);
        assert!(d.normal_cone_residual(&x, &u).unwrap().abs() < 1e-15);
        assert!(grid_max(&u).abs() < 1e-15);
        let u = v(&[1.0, 0.0]);
        assert!((d.normal_cone_residual(&x, &u).unwrap() - 0.5).abs() < 1e-15);
        assert!((grid_max(&u) - 0.5).abs() < 1e-15);

        let b = ConvexCompactSet::ball(2).unwrap();
        assert_eq!(b.normal_cone_residual(&v(&[1.0, 0.0]), &v(&[1.0, 0.0])).unwrap(), 0.0);
        assert!(matches!(
            b.normal_cone_residual(&v(&[2.0, 0.0]), &v(&[1.0, 0.0])),
            Err(Error::PointNotInSet { .. })
        ));
    }

    #[test]
    fn sample_examples() {
        let d = ConvexCompactSet::simplex(2).unwrap();
        let s = d.sample(2, 0);
        assert_eq!(s, vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]);

        let b = ConvexCompactSet::ball(2).unwrap();
        let s = b.sample(100, 1);
        assert_eq!(s.len(), 100);
        assert!(s.iter().all(|p| p.norm() <= 1.0));

        let cap = ConvexCompactSet::ball_cap_cone(PolyhedralCone::orthant(2).unwrap());
        let s = cap.sample(50, 2);
        assert_eq!(s.len(), 50);
        assert!(s.iter().all(|p| p[0] >= 0.0 && p[1] >= 0.0 && p.norm() <= 1.0 + 1e-15));
        assert_eq!(cap.sample(50, 2), s);
    }

    #[test]
    fn ball_cap_projection_matches_dykstra() {
        let cone = PolyhedralCone::from_generators(2, vec![v(&[1.0, 0.2]), v(&[0.3, 1.0])]).unwrap();
        let cap = ConvexCompactSet::ball_cap_cone(cone);
        for q in [v(&[3.0, -1.0]), v(&[-2.0, -2.0]), v(&[0.2, 0.3]), v(&[-1.0, 4.0])] {
            let a = cap.project(&q).unwrap().point;
            let b = cap.project_dykstra(&q).unwrap();
            assert!(a.dist(&b) < 1e-9, "{q:?}: {a:?} vs {b:?}");
        }
    }
}

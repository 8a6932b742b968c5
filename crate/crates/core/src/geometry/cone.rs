//! Finitely generated convex cones with a dual halfspace description.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nnls::nnls;
use super::{ProjectionResult, TAU_GEO};
use crate::error::{Error, Result};
use crate::vector::Vector;

/// Largest ambient dimension for which facets are enumerated.
pub const MAX_CONE_DIM: usize = 6;

/// A closed convex cone `P = cone(G) = {x : <h, x> <= 0 for h in H}`.
///
/// Both lists hold unit vectors. `H` generates the polar cone, so `polar`
/// just swaps the two lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralCone {
    dim: usize,
    generators: Vec<Vector>,
    halfspaces: Vec<Vector>,
}

impl PolyhedralCone {
    /// Builds the cone generated by `generators`, deriving its facets.
    pub fn from_generators(dim: usize, generators: Vec<Vector>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidCone("ambient dimension must be positive".into()));
        }
        if dim > MAX_CONE_DIM {
            return Err(Error::InvalidCone(format!(
                "facet enumeration supports dimension <= {MAX_CONE_DIM}, got {dim}"
            )));
        }
        let mut units = Vec::with_capacity(generators.len());
        for (i, g) in generators.iter().enumerate() {
            Error::check_dim(dim, g.dim())?;
            let u = g
                .normalized()
                .filter(|_| g.norm() > TAU_GEO)
                .ok_or_else(|| Error::InvalidCone(format!("generator {i} is zero")))?;
            units.push(u);
        }
        let halfspaces = polar_generators(dim, &units);
        let cone = Self {
            dim,
            generators: units,
            halfspaces,
        };
        cone.cross_validate()?;
        Ok(cone)
    }

    /// The nonnegative orthant `R^N_+`.
    pub fn orthant(dim: usize) -> Result<Self> {
        Self::from_generators(dim, (0..dim).map(|i| Vector::basis(dim, i)).collect())
    }

    /// The whole space, generated by `±e_i`.
    pub fn whole_space(dim: usize) -> Result<Self> {
        let mut gens = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            gens.push(Vector::basis(dim, i));
            gens.push(-&Vector::basis(dim, i));
        }
        Self::from_generators(dim, gens)
    }

    /// The ray spanned by one direction.
    pub fn ray(direction: Vector) -> Result<Self> {
        Self::from_generators(direction.dim(), vec![direction])
    }

    /// The trivial cone `{0_N}`.
    pub fn zero(dim: usize) -> Result<Self> {
        Self::from_generators(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    pub fn halfspaces(&self) -> &[Vector] {
        &self.halfspaces
    }

    /// The polar cone `P° = {z : <p, z> <= 0 for all p in P}`.
    pub fn polar(&self) -> PolyhedralCone {
        PolyhedralCone {
            dim: self.dim,
            generators: self.halfspaces.clone(),
            halfspaces: self.generators.clone(),
        }
    }

    /// The reflected cone `-P`.
    pub fn negated(&self) -> PolyhedralCone {
        PolyhedralCone {
            dim: self.dim,
            generators: self.generators.iter().map(|g| -g).collect(),
            halfspaces: self.halfspaces.iter().map(|h| -h).collect(),
        }
    }

    /// Largest halfspace violation `max_h <h, x>` (nonpositive inside the cone).
    pub fn violation(&self, x: &Vector) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.dot(x))
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    }

    /// Smallest halfspace slack `min_h -<h, x>`; `+inf` for the whole space.
    pub fn slack(&self, x: &Vector) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| -h.dot(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.dim() == self.dim && self.halfspaces.iter().all(|h| h.dot(x) <= tol)
    }

    /// `true` iff `<g, z> <= tol` for every (unit) generator `g`, i.e. `z ∈ P°`.
    pub fn polar_contains(&self, z: &Vector, tol: f64) -> Result<bool> {
        Error::check_dim(self.dim, z.dim())?;
        Ok(self.polar_violation(z) <= tol)
    }

    /// `max_g <g, z>` over unit generators, floored at zero.
    pub fn polar_violation(&self, z: &Vector) -> f64 {
        self.generators
            .iter()
            .map(|g| g.dot(z))
            .fold(0.0, f64::max)
    }

    /// Euclidean projection onto the cone by nonnegative least squares
    /// over the generators.
    pub fn project(&self, v: &Vector) -> Result<ProjectionResult> {
        Error::check_dim(self.dim, v.dim())?;
        let point = self.nnls_point(v);
        let distance = point.dist(v);
        Ok(ProjectionResult { point, distance })
    }

    fn nnls_point(&self, v: &Vector) -> Vector {
        if self.generators.is_empty() {
            return Vector::zeros(self.dim);
        }
        let cols: Vec<&[f64]> = self.generators.iter().map(|g| g.as_slice()).collect();
        let coef = nnls(&cols, v.as_slice());
        Vector::combination(self.dim, &self.generators, &coef)
    }

    /// Projection by Dykstra's alternating scheme over the halfspaces.
    ///
    /// Independent of the generator route; used to cross-check `project`.
    pub fn project_dykstra(&self, v: &Vector, max_sweeps: usize, tol: f64) -> Result<Vector> {
        Error::check_dim(self.dim, v.dim())?;
        let mut x = v.clone();
        let mut corrections = vec![Vector::zeros(self.dim); self.halfspaces.len()];
        for _ in 0..max_sweeps {
            let mut moved = 0.0;
            for (h, c) in self.halfspaces.iter().zip(corrections.iter_mut()) {
                let y = &x + c;
                let excess = h.dot(&y).max(0.0);
                let next = y.axpy(-excess, h);
                *c = &y - &next;
                moved += next.dist(&x);
                x = next;
            }
            if moved < tol {
                break;
            }
        }
        Ok(x)
    }

    /// Dimension of `span(G)`.
    pub fn span_dim(&self) -> usize {
        span_basis(self.dim, &self.generators).0.len()
    }

    /// `true` iff `-g ∈ P` for every generator, i.e. `P` is a linear subspace.
    pub fn is_subspace(&self) -> bool {
        self.generators
            .iter()
            .all(|g| self.contains(&-g, TAU_GEO))
    }

    fn cross_validate(&self) -> Result<()> {
        for (i, g) in self.generators.iter().enumerate() {
            if let Some(h) = self.halfspaces.iter().find(|h| h.dot(g) > TAU_GEO) {
                return Err(Error::InvalidCone(format!(
                    "generator {i} violates derived facet {h:?}"
                )));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
        for _ in 0..32 {
            if self.generators.is_empty() {
                break;
            }
            let w: Vec<f64> = self.generators.iter().map(|_| rng.random::<f64>()).collect();
            let x = Vector::combination(self.dim, &self.generators, &w);
            if self.violation(&x) > TAU_GEO * (1.0 + x.norm()) {
                return Err(Error::InvalidCone(
                    "random generator combination violates derived facets".into(),
                ));
            }
        }
        for _ in 0..32 {
            let z = Vector::raw((0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect());
            let margin = self
                .halfspaces
                .iter()
                .map(|h| h.dot(&z))
                .fold(f64::NEG_INFINITY, f64::max);
            let gap = self.nnls_point(&z).dist(&z);
            let inside_by_facets = margin < -1e-6;
            let outside_by_facets = margin > 1e-6;
            if (inside_by_facets && gap > 1e-7) || (outside_by_facets && gap < 1e-9) {
                return Err(Error::InvalidCone(
                    "facet description disagrees with generator description".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Generators of `{z : <g, z> <= 0 for all g}` for unit generators `g`.
///
/// The polar splits as `span(G)^⊥ ⊕ (P° ∩ span(G))`. The second summand is
/// pointed; its extreme rays are the one-dimensional solution sets of
/// `d - 1` linearly independent active constraints, `d = dim span(G)`.
fn polar_generators(dim: usize, gens: &[Vector]) -> Vec<Vector> {
    let (span, complement) = span_basis(dim, gens);
    let mut out: Vec<Vector> = Vec::new();
    for w in &complement {
        out.push(w.clone());
        out.push(-w);
    }
    let d = span.len();
    if d == 0 {
        return out;
    }
    // constraint normals in span coordinates
    let coords: Vec<Vec<f64>> = gens
        .iter()
        .map(|g| span.iter().map(|u| u.dot(g)).collect())
        .collect();
    let push_unique = |v: Vector, out: &mut Vec<Vector>| {
        if !out.iter().any(|o| o.dot(&v) > 1.0 - 1e-9) {
            out.push(v);
        }
    };

    let mut subset: Vec<usize> = (0..d.saturating_sub(1)).collect();
    let m = coords.len();
    if d - 1 > m {
        return out;
    }
    loop {
        if let Some(y) = null_direction(d, &coords, &subset) {
            for sign in [1.0, -1.0] {
                let ys: Vec<f64> = y.iter().map(|c| c * sign).collect();
                let feasible = coords
                    .iter()
                    .all(|a| a.iter().zip(&ys).map(|(p, q)| p * q).sum::<f64>() <= 1e-10);
                if feasible {
                    let ray = Vector::combination(dim, &span, &ys);
                    if let Some(unit) = ray.normalized() {
                        push_unique(unit, &mut out);
                    }
                }
            }
        }
        if !next_combination(&mut subset, m) {
            break;
        }
    }
    out
}

/// Orthonormal bases of `span(gens)` and its orthogonal complement.
fn span_basis(dim: usize, gens: &[Vector]) -> (Vec<Vector>, Vec<Vector>) {
    let gram = DMatrix::<f64>::from_fn(dim, dim, |i, j| gens.iter().map(|g| g[i] * g[j]).sum());
    let eig = SymmetricEigen::new(gram);
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let mut span = Vec::new();
    let mut complement = Vec::new();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    for k in order {
        let col: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let v = Vector::raw(col);
        if lmax > 0.0 && eig.eigenvalues[k] > 1e-12 * lmax {
            span.push(v);
        } else {
            complement.push(v);
        }
    }
    (span, complement)
}

/// Unit null vector of the rows `coords[subset]` in R^d, if they have rank `d - 1`.
fn null_direction(d: usize, coords: &[Vec<f64>], subset: &[usize]) -> Option<Vec<f64>> {
    if subset.is_empty() {
        return (d == 1).then(|| vec![1.0]);
    }
    let gram = DMatrix::from_fn(d, d, |i, j| subset.iter().map(|&r| coords[r][i] * coords[r][j]).sum());
    let eig = SymmetricEigen::new(gram);
    let mut vals: Vec<(f64, usize)> = eig.eigenvalues.iter().copied().zip(0..d).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lmax = vals[d - 1].0;
    // exactly one (numerically) zero eigenvalue
    if vals[0].0 > 1e-12 * lmax.max(1e-300) || (d > 1 && vals[1].0 <= 1e-10 * lmax) {
        return None;
    }
    Some(eig.eigenvectors.column(vals[0].1).iter().copied().collect())
}

fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    /// Brute-force membership in the polar: sign check against generators.
    fn in_polar_brute(gens: &[Vector], z: &Vector) -> bool {
        gens.iter().all(|g| g.dot(z) <= 1e-12)
    }

    #[test]
    fn orthant_polar_is_negative_orthant() {
        let p = PolyhedralCone::orthant(2).unwrap();
        let q = p.polar();
        assert!(q.contains(&v(&[-1.0, -2.0]), 1e-12));
        assert!(!q.contains(&v(&[1.0, -2.0]), 1e-12));
        assert!(q.polar_contains(&v(&[3.0, 0.5]), 1e-12).unwrap());
    }

    #[test]
    fn whole_space_polar_is_origin() {
        let p = PolyhedralCone::whole_space(3).unwrap();
        assert!(p.halfspaces().is_empty());
        let q = p.polar();
        assert!(q.contains(&Vector::zeros(3), 1e-12));
        assert!(!q.contains(&v(&[1e-6, 0.0, 0.0]), 1e-9));
        assert_eq!(q.project(&v(&[1.0, 2.0, 3.0])).unwrap().point, Vector::zeros(3));
    }

    #[test]
    fn ray_polar_matches_dense_sign_check() {
        // oracle: sample the circle densely and compare with the sign of x1 + x2
        let p = PolyhedralCone::ray(v(&[1.0, 1.0])).unwrap();
        let q = p.polar();
        for k in 0..3600 {
            let t = k as f64 * std::f64::consts::TAU / 3600.0;
            let z = v(&[t.cos(), t.sin()]);
            let expected = z[0] + z[1] <= 1e-12;
            assert_eq!(q.contains(&z, 1e-12), expected, "angle {t}");
            assert_eq!(in_polar_brute(p.generators(), &z), expected);
        }
    }

    #[test]
    fn project_examples() {
        let p = PolyhedralCone::orthant(2).unwrap();
        assert_eq!(p.project(&v(&[1.0, 2.0])).unwrap().point, v(&[1.0, 2.0]));
        let r = p.project(&v(&[-1.0, -2.0])).unwrap();
        assert!(r.point.norm() < 1e-15);
        assert!((r.distance - 5f64.sqrt()).abs() < 1e-14);
        let r = p.project(&v(&[1.0, -1.0])).unwrap();
        assert!(r.point.dist(&v(&[1.0, 0.0])) < 1e-14);
        assert!(matches!(p.project(&v(&[1.0])), Err(Error::Dimension { .. })));
    }

    #[test]
    fn polar_contains_examples() {
        let p = PolyhedralCone::orthant(2).unwrap();
        assert!(p.polar_contains(&v(&[-1.0, -2.0]), 1e-10).unwrap());
        assert!(p.polar_contains(&v(&[1e-12, -1.0]), 1e-10).unwrap());
        let ray = PolyhedralCone::ray(v(&[1.0, 0.0])).unwrap();
        assert!(ray.polar_contains(&v(&[-0.5, 7.0]), 1e-10).unwrap());
        assert!(!ray.polar_contains(&v(&[0.5, 7.0]), 1e-10).unwrap());
    }

    #[test]
    fn dykstra_agrees_with_nnls() {
        let p = PolyhedralCone::from_generators(
            3,
            vec![v(&[1.0, 0.0, 1.0]), v(&[0.0, 1.0, 1.0]), v(&[-1.0, 0.0, 1.0]), v(&[0.0, -1.0, 1.0])],
        )
        .unwrap();
        for z in [v(&[3.0, -1.0, 0.2]), v(&[-0.3, 0.4, -2.0]), v(&[0.1, 0.1, 1.0])] {
            let a = p.project(&z).unwrap().point;
            let b = p.project_dykstra(&z, 200_000, 1e-14).unwrap();
            assert!(a.dist(&b) < 1e-8, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn rejects_zero_generator_and_large_dim() {
        assert!(PolyhedralCone::from_generators(2, vec![Vector::zeros(2)]).is_err());
        assert!(PolyhedralCone::orthant(7).is_err());
        assert!(PolyhedralCone::from_generators(2, vec![v(&[1.0, 0.0, 0.0])]).is_err());
    }

    #[test]
    fn empty_generators_give_origin() {
        let p = PolyhedralCone::zero(2).unwrap();
        assert!(p.contains(&Vector::zeros(2), 0.0));
        assert!(!p.contains(&v(&[0.1, 0.0]), 1e-9));
        assert!(p.polar().halfspaces().is_empty());
    }

    #[test]
    fn subspace_detection() {
        assert!(!PolyhedralCone::orthant(2).unwrap().is_subspace());
        assert!(PolyhedralCone::whole_space(2).unwrap().is_subspace());
        let line = PolyhedralCone::from_generators(2, vec![v(&[1.0, 1.0]), v(&[-1.0, -1.0])]).unwrap();
        assert!(line.is_subspace());
        assert!(PolyhedralCone::zero(3).unwrap().is_subspace());
    }
}

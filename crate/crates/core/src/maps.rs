//! Continuous maps and polytope-valued correspondences.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Raw coordinate closure behind a [`MapOracle`].
pub type Evaluator = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A map `f: R^N -> R^N` given as a closure, with a human-readable descriptor.
#[derive(Clone)]
pub struct MapOracle {
    dim: usize,
    descriptor: String,
    eval: Arc<Evaluator>,
}

impl MapOracle {
    pub fn new<F>(dim: usize, descriptor: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            descriptor: descriptor.into(),
            eval: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        Error::check_dim(self.dim, x.dim())?;
        let out = (self.eval)(x.as_slice());
        Error::check_dim(self.dim, out.len())?;
        Vector::new(out)
    }

    /// `f(x) = -x`
    pub fn neg_identity(dim: usize) -> Self {
        Self::new(dim, "neg-identity", |x| x.iter().map(|c| -c).collect())
    }

    pub fn constant(c: Vector) -> Self {
        let dim = c.dim();
        let coords = c.into_inner();
        Self::new(dim, format!("constant{coords:?}"), move |_| coords.clone())
    }

    /// `f(x) = A x + b` with `A` given row by row.
    pub fn affine(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let dim = b.len();
        if a.len() != dim {
            return Err(Error::Dimension { expected: dim, got: a.len() });
        }
        for row in &a {
            Error::check_dim(dim, row.len())?;
        }
        Vector::from_slice(&b)?;
        for row in &a {
            Vector::from_slice(row)?;
        }
        Ok(Self::new(dim, "affine", move |x| {
            a.iter()
                .zip(&b)
                .map(|(row, bi)| row.iter().zip(x).map(|(r, c)| r * c).sum::<f64>() + bi)
                .collect()
        }))
    }

    /// `x -> f(x) - x`, the map whose HS solutions are fixed points of `f`.
    pub fn displacement(&self) -> Self {
        let f = self.eval.clone();
        Self::new(self.dim, format!("{} - id", self.descriptor), move |x| {
            f(x).iter().zip(x).map(|(a, b)| a - b).collect()
        })
    }

    /// `x -> f(g(x))`
    pub fn compose(&self, inner: Arc<Evaluator>, label: &str) -> Self {
        let f = self.eval.clone();
        Self::new(self.dim, format!("{} o {label}", self.descriptor), move |x| f(&inner(x)))
    }
}

impl fmt::Debug for MapOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapOracle")
            .field("dim", &self.dim)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

#[derive(Clone, Debug)]
enum Values {
    Branches(Vec<MapOracle>),
    /// `{z in inner(p) : <p, z> <= 0}`, falling back to `inner(p)` when empty.
    WalrasFiltered(Box<CorrespondenceOracle>),
}

/// A correspondence `ζ(x) = conv{f_1(x), ..., f_J(x)}` with continuous branches.
#[derive(Clone, Debug)]
pub struct CorrespondenceOracle {
    dim: usize,
    values: Values,
}

impl CorrespondenceOracle {
    pub fn new(branches: Vec<MapOracle>) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::InvalidConfig("a correspondence needs at least one branch".into()))?;
        let dim = first.dim();
        for b in &branches {
            Error::check_dim(dim, b.dim())?;
        }
        Ok(Self {
            dim,
            values: Values::Branches(branches),
        })
    }

    pub fn from_map(f: MapOracle) -> Self {
        Self {
            dim: f.dim(),
            values: Values::Branches(vec![f]),
        }
    }

    /// `ζ(x) ≡ conv{points}`
    pub fn constant(points: Vec<Vector>) -> Result<Self> {
        Self::new(points.into_iter().map(MapOracle::constant).collect())
    }

    /// Restriction to `{z : <p, z> <= 0}` (ties kept). Where the restriction
    /// would be empty the unfiltered value is used.
    pub fn walras_filtered(self) -> Self {
        Self {
            dim: self.dim,
            values: Values::WalrasFiltered(Box::new(self)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Continuous branches, when the value is their convex hull.
    pub fn branches(&self) -> Option<&[MapOracle]> {
        match &self.values {
            Values::Branches(b) => Some(b),
            Values::WalrasFiltered(_) => None,
        }
    }

    /// Vertices (possibly redundant) of `ζ(x)`.
    pub fn values(&self, x: &Vector) -> Result<Vec<Vector>> {
        match &self.values {
            Values::Branches(branches) => branches.iter().map(|b| b.eval(x)).collect(),
            Values::WalrasFiltered(inner) => {
                let raw = inner.values(x)?;
                Ok(halfspace_clip(&raw, x))
            }
        }
    }
}

/// Vertices of `conv(points) ∩ {z : <p, z> <= 0}` (a superset: every kept
/// point and every edge crossing), or `points` itself when that set is empty.
fn halfspace_clip(points: &[Vector], p: &Vector) -> Vec<Vector> {
    let s: Vec<f64> = points.iter().map(|z| z.dot(p)).collect();
    let mut out: Vec<Vector> = points
        .iter()
        .zip(&s)
        .filter(|(_, &si)| si <= 0.0)
        .map(|(z, _)| z.clone())
        .collect();
    if out.is_empty() {
        return points.to_vec();
    }
    for i in 0..points.len() {
        for j in 0..points.len() {
            if s[i] > 0.0 && s[j] < 0.0 {
                let t = s[i] / (s[i] - s[j]);
                out.push(points[i].axpy(t, &(&points[j] - &points[i])));
            }
        }
    }
    out
}

//! Exchange economies with Cobb–Douglas consumers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::MapOracle;
use crate::vector::Vector;

/// Prices are raised to this floor before demand is evaluated, which keeps
/// excess demand finite on the whole simplex.
pub const DEFAULT_PRICE_FLOOR: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CobbDouglasEconomy {
    shares: Vec<Vector>,
    endowments: Vec<Vector>,
    floor: f64,
}

impl CobbDouglasEconomy {
    /// Shares must lie on the simplex; endowments must be nonnegative and
    /// nonzero.
    pub fn new(shares: Vec<Vector>, endowments: Vec<Vector>) -> Result<Self> {
        Self::with_floor(shares, endowments, DEFAULT_PRICE_FLOOR)
    }

    pub fn with_floor(shares: Vec<Vector>, endowments: Vec<Vector>, floor: f64) -> Result<Self> {
        if shares.is_empty() {
            return Err(Error::InvalidConfig("economy needs at least one agent".into()));
        }
        if shares.len() != endowments.len() {
            return Err(Error::InvalidConfig(format!(
                "{} share vectors but {} endowments",
                shares.len(),
                endowments.len()
            )));
        }
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(Error::InvalidConfig("price floor must be positive".into()));
        }
        let dim = shares[0].dim();
        if dim == 0 {
            return Err(Error::InvalidConfig("economy needs at least one good".into()));
        }
        for (i, (a, w)) in shares.iter().zip(&endowments).enumerate() {
            Error::check_dim(dim, a.dim())?;
            Error::check_dim(dim, w.dim())?;
            let sum: f64 = a.iter().sum();
            if a.iter().any(|&s| s < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!("agent {i}: shares must lie on the simplex")));
            }
            if w.iter().any(|&e| e < 0.0) || w.iter().all(|&e| e == 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "agent {i}: endowments must be nonnegative and nonzero"
                )));
            }
        }
        Ok(Self {
            shares,
            endowments,
            floor,
        })
    }

    pub fn dim(&self) -> usize {
        self.shares[0].dim()
    }

    pub fn agents(&self) -> usize {
        self.shares.len()
    }

    pub fn shares(&self) -> &[Vector] {
        &self.shares
    }

    pub fn endowments(&self) -> &[Vector] {
        &self.endowments
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// `ζ_j(p) = Σ_i α^i_j <p̃, w^i> / p̃_j - Σ_i w^i_j` with `p̃ = max(p, floor)`.
    pub fn excess_demand(&self, p: &[f64]) -> Vec<f64> {
        let pt: Vec<f64> = p.iter().map(|&c| c.max(self.floor)).collect();
        let mut z = vec![0.0; p.len()];
        for (a, w) in self.shares.iter().zip(&self.endowments) {
            let income: f64 = pt.iter().zip(w.iter()).map(|(x, y)| x * y).sum();
            for j in 0..z.len() {
                z[j] += a[j] * income / pt[j] - w[j];
            }
        }
        z
    }

    pub fn to_map_oracle(&self) -> MapOracle {
        let me = self.clone();
        MapOracle::new(self.dim(), "cobb-douglas", move |p| me.excess_demand(p))
    }
}

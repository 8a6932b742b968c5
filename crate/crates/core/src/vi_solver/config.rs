use serde::{Deserialize, Serialize};

use crate::approximation::DEFAULT_CENTER_CAP;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Residual target.
    pub tol: f64,
    /// Iteration budget for the extragradient phase, shared by all starts.
    pub max_iter: usize,
    /// Initial step `γ₀`.
    pub step: f64,
    /// Step reduction factor on a failed step test.
    pub backtrack: f64,
    pub restarts: usize,
    /// `ε_0` of the radius schedule `ε_k = ε_0 · decay^k`.
    pub epsilon0: f64,
    pub decay: f64,
    /// Largest dimension for which the grid fallback runs.
    pub grid_fallback_dim: usize,
    pub seed: u64,
    /// Covering size limit that ends the radius schedule.
    pub center_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100_000,
            step: 0.5,
            backtrack: 0.5,
            restarts: 8,
            epsilon0: 0.25,
            decay: 0.5,
            grid_fallback_dim: 4,
            seed: 0,
            center_cap: DEFAULT_CENTER_CAP,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be positive");
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return bad("decay must lie in (0, 1)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive");
        }
        if !(self.epsilon0 > 0.0 && self.epsilon0.is_finite()) {
            return bad("epsilon0 must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if self.center_cap == 0 {
            return bad("center_cap must be at least 1");
        }
        Ok(())
    }

    /// `ε_k = ε_0 · decay^k`
    pub fn epsilon(&self, k: usize) -> f64 {
        self.epsilon0 * self.decay.powi(k as i32)
    }
}

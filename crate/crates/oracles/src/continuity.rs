use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use vieq_core::{ConvexCompactSet, MapOracle, Vector};

use crate::Result;

/// Difference quotients above this are reported as suspect.
pub const DEFAULT_FLAG_RATIO: f64 = 1e3;

const DIRECTIONS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    /// `max |f(x + h d) - f(x)| / h` over probed `x` and unit `d`.
    pub max_ratio: f64,
    pub at: Vector,
    pub direction: Vector,
    pub h: f64,
    pub threshold: f64,
    pub flagged: bool,
    pub probes: usize,
}

pub fn continuity_probe(f: &MapOracle, k: &ConvexCompactSet, samples: usize, h: f64, seed: u64) -> Result<ContinuityReport> {
    continuity_probe_at(f, &k.sample(samples, seed), h, seed, DEFAULT_FLAG_RATIO)
}

/// Probes at the given points, `DIRECTIONS` random unit directions each.
pub fn continuity_probe_at(f: &MapOracle, points: &[Vector], h: f64, seed: u64, threshold: f64) -> Result<ContinuityReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(vieq_core::Error::InvalidConfig(format!("probe step must be positive, got {h}")).into());
    }
    let n = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ff_ee00);
    let mut best = (0.0f64, Vector::zeros(n), Vector::zeros(n));
    let mut probes = 0;
    for x in points {
        let fx = f.eval(x)?;
        for _ in 0..DIRECTIONS {
            let d = loop {
                let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                if let Some(u) = Vector::new(g)?.normalized() {
                    break u;
                }
            };
            let y = x.axpy(h, &d);
            let ratio = f.eval(&y)?.dist(&fx) / h;
            probes += 1;
            if ratio > best.0 {
                best = (ratio, x.clone(), d);
            }
        }
    }
    Ok(ContinuityReport {
        max_ratio: best.0,
        at: best.1,
        direction: best.2,
        h,
        threshold,
        flagged: best.0 > threshold,
        probes,
    })
}

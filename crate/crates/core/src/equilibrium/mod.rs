//! Equilibrium prices for excess-demand correspondences, the supporting
//! lemma as a certificate check, and Brouwer/Kakutani fixed points.

mod economy;
mod fixed_point;
mod gnd;
pub mod interval;
mod supporting;
mod walras;

pub use economy::{CobbDouglasEconomy, DEFAULT_PRICE_FLOOR};
pub use fixed_point::{solve_brouwer, solve_kakutani, FixedPointResult};
pub use gnd::{certify_cone, certify_simplex, solve_gnd, solve_gnd_general};
pub use supporting::{verify_supporting_lemma, SupportingLemmaReport};
pub use walras::{check_walras, walras_prices, WalrasReport};

use serde::{Deserialize, Serialize};

use crate::certificate::CertificateReport;
use crate::vector::Vector;
use crate::vi_solver::TraceEntry;

/// Price samples used for the advisory value-condition scan.
pub const WALRAS_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeCase {
    Simplex,
    Subspace,
    ProperCone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub cone_case: ConeCase,
    pub price: Vector,
    pub witness: Vector,
    /// HS solution before retraction; equals `price` except in the proper-cone case.
    pub hs_point: Vector,
    pub hs_residual: f64,
    /// `<p̄, z̄>`
    pub walras_value: f64,
    /// Sampled maximum of `<p, z>` over the value-condition domain.
    pub walras_check: f64,
    /// `max_j z̄_j` on the simplex, `max_g <g, z̄>` over cone generators otherwise.
    pub target_gap: f64,
    pub membership_gap: f64,
    pub retraction_witness: Option<Vector>,
    pub epsilon_final: Option<f64>,
    pub method: String,
    pub iterations: usize,
    pub tol: f64,
    pub warnings: Vec<String>,
    pub report: CertificateReport,
    /// Solver iterates; not part of the serialized certificate.
    #[serde(skip)]
    pub trace: Vec<TraceEntry>,
}

impl EquilibriumCertificate {
    pub fn passed(&self) -> bool {
        self.report.passed
    }
}

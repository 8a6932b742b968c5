//! Pass/fail reports assembled from independently recomputed quantities.

use serde::{Deserialize, Serialize};

/// One recomputed quantity compared against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= tol`. Non-finite values fail.
    pub fn at_most(name: &str, value: f64, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tol,
            passed: value.is_finite() && value <= tol,
        }
    }

    /// `tol - value`; positive when the check passes.
    pub fn margin(&self) -> f64 {
        self.tol - self.value
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl CertificateReport {
    pub fn new(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { checks, passed }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
        self.passed = self.checks.iter().all(|c| c.passed);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Names of the failing checks.
    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

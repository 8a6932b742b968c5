//! Mode dispatch, certificate re-verification and run reports.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vieq_core::approximation::{correspondence_distance, nearest_in_value};
use vieq_core::certificate::{CertificateReport, Check};
use vieq_core::equilibrium::{
    certify_cone, certify_simplex, solve_brouwer, solve_gnd, solve_gnd_general, solve_kakutani, ConeCase,
    EquilibriumCertificate, FixedPointResult,
};
use vieq_core::retraction::RetractionMap;
use vieq_core::vi_solver::{
    hs_residual, residual_of, solve_hs, solve_hs_correspondence, verify_hs, verify_hs_pair, EpsilonStep, Method,
    SolverConfig, TraceEntry,
};
use vieq_core::{Error, MapOracle, Vector, TAU_GEO};
use vieq_oracles::{continuity_probe, grid_hs_oracle, GridOracleResult, GridSpec};

use crate::error::{CliError, Result};
use crate::problem::{Mode, Problem, ProblemSpec, FORMAT_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    Vi {
        point: Vector,
        value: Vector,
        residual: f64,
        fixed_point_gap: f64,
        method: Method,
        iterations: usize,
    },
    ViCorrespondence {
        point: Vector,
        witness: Vector,
        residual: f64,
        membership_gap: f64,
        epsilon_final: f64,
        iterations: usize,
        branch_mixture: Option<Vec<f64>>,
        steps: Vec<EpsilonStep>,
    },
    Equilibrium(EquilibriumCertificate),
    FixedPoint(FixedPointResult),
    Retraction {
        witness: Vector,
        inputs: Vec<Vector>,
        outputs: Vec<Vector>,
    },
    /// The solver gave up; `best` is its best-effort point.
    Failed {
        error: String,
        best: Option<Vector>,
        residual: Option<f64>,
    },
}

/// Brute-force comparison attached with `--oracle`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleBlock {
    pub oracle: bool,
    pub grid: Option<GridOracleResult>,
    pub lipschitz_estimate: Option<f64>,
    pub solver_residual: Option<f64>,
    /// Solver residual within grid spacing times the Lipschitz estimate
    /// (plus 1e-6) of the best grid residual.
    pub agreement: Option<bool>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: String,
    pub library_version: String,
    pub mode: Mode,
    pub problem: ProblemSpec,
    pub config: SolverConfig,
    pub seed: u64,
    pub certificate: Certificate,
    pub checks: CertificateReport,
    pub passed: bool,
    pub warnings: Vec<String>,
    pub trace_path: Option<String>,
    pub oracle: Option<OracleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// The report without the wall-clock field, byte-stable for a fixed seed.
    pub fn deterministic_json(&self) -> String {
        Self {
            wall_time_ms: None,
            ..self.clone()
        }
        .to_json()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub format_version: String,
    pub mode: Mode,
    pub checks: CertificateReport,
    pub passed: bool,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub mode: Option<Mode>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub trace: Option<PathBuf>,
    pub oracle: bool,
}

impl RunOptions {
    pub fn apply(&self, spec: &ProblemSpec) -> ProblemSpec {
        let mut s = spec.clone();
        if let Some(m) = self.mode {
            s.mode = m;
        }
        if let Some(t) = self.tol {
            s.solver.tol = t;
        }
        if let Some(m) = self.max_iter {
            s.solver.max_iter = m;
        }
        if let Some(seed) = self.seed {
            s.solver.seed = seed;
        }
        s
    }
}

struct Solved {
    certificate: Certificate,
    trace: Vec<TraceEntry>,
    warnings: Vec<String>,
}

fn failed(e: Error) -> Solved {
    let (best, residual) = match &e {
        Error::NoConvergence { best, residual, .. } => (Some(best.clone()), Some(*residual)),
        _ => (None, None),
    };
    Solved {
        certificate: Certificate::Failed {
            error: e.to_string(),
            best,
            residual,
        },
        trace: Vec::new(),
        warnings: Vec::new(),
    }
}

fn need_map(p: &Problem) -> Result<&MapOracle> {
    p.map
        .as_ref()
        .ok_or_else(|| CliError::schema("map", format!("required for mode `{}`", p.spec.mode.name())))
}

fn need_zeta(p: &Problem) -> Result<vieq_core::CorrespondenceOracle> {
    p.correspondence()
        .ok_or_else(|| CliError::schema("map", format!("a map or correspondence is required for mode `{}`", p.spec.mode.name())))
}

fn need_cone(p: &Problem) -> Result<&vieq_core::PolyhedralCone> {
    p.cone
        .as_ref()
        .ok_or_else(|| CliError::schema("cone", format!("required for mode `{}`", p.spec.mode.name())))
}

fn solve(p: &Problem) -> Result<Solved> {
    let cfg = &p.spec.solver;
    let out = match p.spec.mode {
        Mode::Vi => match (&p.map, &p.zeta) {
            (Some(f), _) => match solve_hs(&p.set, f, cfg) {
                Ok(s) => Solved {
                    certificate: Certificate::Vi {
                        point: s.point,
                        value: s.value,
                        residual: s.residual,
                        fixed_point_gap: s.fixed_point_gap,
                        method: s.method,
                        iterations: s.iterations,
                    },
                    trace: s.trace,
                    warnings: Vec::new(),
                },
                Err(e) => failed(e),
            },
            (None, Some(zeta)) => match solve_hs_correspondence(&p.set, zeta, cfg) {
                Ok(s) => Solved {
                    trace: s.steps.iter().map(TraceEntry::from_step).collect(),
                    certificate: Certificate::ViCorrespondence {
                        point: s.point,
                        witness: s.witness,
                        residual: s.residual,
                        membership_gap: s.membership_gap,
                        epsilon_final: s.epsilon_final,
                        iterations: s.iterations,
                        branch_mixture: s.branch_mixture,
                        steps: s.steps,
                    },
                    warnings: Vec::new(),
                },
                Err(e) => failed(e),
            },
            (None, None) => return Err(CliError::schema("map", "required for mode `vi`")),
        },
        Mode::Gnd | Mode::GndGeneral => {
            let zeta = need_zeta(p)?;
            let res = if p.spec.mode == Mode::Gnd {
                solve_gnd(&zeta, cfg, p.spec.weak_form)
            } else {
                solve_gnd_general(need_cone(p)?, &zeta, cfg)
            };
            match res {
                Ok(mut c) => Solved {
                    trace: std::mem::take(&mut c.trace),
                    warnings: c.warnings.clone(),
                    certificate: Certificate::Equilibrium(c),
                },
                Err(e) => failed(e),
            }
        }
        Mode::Brouwer | Mode::Kakutani => {
            let res = if p.spec.mode == Mode::Brouwer {
                solve_brouwer(&p.set, need_map(p)?, cfg)
            } else {
                solve_kakutani(&p.set, &need_zeta(p)?, cfg)
            };
            match res {
                Ok(mut r) => Solved {
                    trace: std::mem::take(&mut r.trace),
                    certificate: Certificate::FixedPoint(r),
                    warnings: Vec::new(),
                },
                Err(e) => failed(e),
            }
        }
        Mode::Retract => {
            let res = RetractionMap::new(need_cone(p)?.clone()).and_then(|r| {
                let outputs = p.points.iter().map(|x| r.retract(x)).collect::<vieq_core::Result<Vec<_>>>()?;
                Ok(Certificate::Retraction {
                    witness: r.witness().clone(),
                    inputs: p.points.clone(),
                    outputs,
                })
            });
            match res {
                Ok(certificate) => Solved {
                    certificate,
                    trace: Vec::new(),
                    warnings: Vec::new(),
                },
                Err(e) => failed(e),
            }
        }
        Mode::Verify => {
            return Err(CliError::Usage("verify checks an existing report; pass it with --report".into()))
        }
    };
    Ok(out)
}

/// Recomputes every gap of `cert` from the raw oracles of `p`.
pub fn verify_certificate(p: &Problem, mode: Mode, cert: &Certificate) -> CertificateReport {
    let tol = p.spec.solver.tol;
    let fail = |name: &str| CertificateReport::new(vec![Check::at_most(name, f64::INFINITY, 0.0)]);
    let dims_ok = |v: &Vector| v.dim() == p.dim();
    match (mode, cert) {
        (_, Certificate::Failed { .. }) => fail("solver"),
        (Mode::Vi, Certificate::Vi { point, .. }) => match &p.map {
            Some(f) if dims_ok(point) => verify_hs(&p.set, f, point, tol),
            _ => fail("certificate_kind"),
        },
        (Mode::Vi, Certificate::ViCorrespondence { point, witness, .. }) => match &p.zeta {
            Some(zeta) if dims_ok(point) && dims_ok(witness) => {
                let mut r = verify_hs_pair(&p.set, point, witness, 10.0 * tol);
                let gap = correspondence_distance(zeta, point, witness).unwrap_or(f64::INFINITY);
                r.push(Check::at_most("membership_gap", gap, 10.0 * tol));
                r
            }
            _ => fail("certificate_kind"),
        },
        (Mode::Gnd, Certificate::Equilibrium(c)) => match p.correspondence() {
            Some(zeta) => {
                let used = if p.spec.weak_form { zeta.walras_filtered() } else { zeta };
                certify_simplex(&used, &c.price, &c.witness, tol)
            }
            None => fail("certificate_kind"),
        },
        (Mode::GndGeneral, Certificate::Equilibrium(c)) => match (p.correspondence(), &p.cone) {
            (Some(zeta), Some(cone)) => {
                let case = if cone.is_subspace() { ConeCase::Subspace } else { ConeCase::ProperCone };
                certify_cone(cone, &zeta, &c.price, &c.witness, case, tol)
            }
            _ => fail("certificate_kind"),
        },
        (Mode::Brouwer, Certificate::FixedPoint(r)) => match &p.map {
            Some(f) if dims_ok(&r.point) => {
                let x = &r.point;
                let gap = f.eval(x).map_or(f64::INFINITY, |y| y.dist(x));
                let res = hs_residual(&p.set, &f.displacement(), x).unwrap_or(f64::INFINITY);
                CertificateReport::new(vec![
                    Check::at_most("membership", p.set.violation(x), TAU_GEO),
                    Check::at_most("fixed_point_gap", gap, 10.0 * tol),
                    Check::at_most("hs_residual", res, 10.0 * tol),
                ])
            }
            _ => fail("certificate_kind"),
        },
        (Mode::Kakutani, Certificate::FixedPoint(r)) => match p.correspondence() {
            Some(zeta) if dims_ok(&r.point) => {
                let x = &r.point;
                let gap = correspondence_distance(&zeta, x, x).unwrap_or(f64::INFINITY);
                let res = nearest_in_value(&zeta, x, x)
                    .and_then(|w| residual_of(&p.set, x, &(&w - x)))
                    .unwrap_or(f64::INFINITY);
                CertificateReport::new(vec![
                    Check::at_most("membership", p.set.violation(x), TAU_GEO),
                    Check::at_most("fixed_point_gap", gap, 10.0 * tol),
                    Check::at_most("hs_residual", res, 10.0 * tol),
                ])
            }
            _ => fail("certificate_kind"),
        },
        (Mode::Retract, Certificate::Retraction { witness, inputs, outputs }) => {
            let Some(cone) = &p.cone else {
                return fail("certificate_kind");
            };
            let Ok(r) = RetractionMap::with_witness(cone.clone(), witness.clone()) else {
                return fail("retraction_witness");
            };
            if inputs.len() != outputs.len() {
                return fail("retraction_count");
            }
            let (mut mismatch, mut norm, mut slack) = (0.0f64, 0.0f64, 0.0f64);
            for (x, y) in inputs.iter().zip(outputs) {
                match r.retract(x) {
                    Ok(z) if z.dim() == y.dim() => {
                        mismatch = mismatch.max(z.dist(y));
                        norm = norm.max((y.norm() - 1.0).abs());
                        slack = slack.max(cone.violation(y));
                    }
                    _ => mismatch = f64::INFINITY,
                }
            }
            CertificateReport::new(vec![
                Check::at_most("retraction_match", mismatch, 1e-12),
                Check::at_most("unit_norm", norm, 1e-9),
                Check::at_most("cone_membership", slack, 1e-9),
            ])
        }
        _ => fail("certificate_kind"),
    }
}

fn oracle_block(p: &Problem, cert: &Certificate) -> OracleBlock {
    let empty = |note: &str| OracleBlock {
        oracle: true,
        grid: None,
        lipschitz_estimate: None,
        solver_residual: None,
        agreement: None,
        note: Some(note.to_string()),
    };
    let (f, point) = match (p.spec.mode, cert, &p.map) {
        (Mode::Vi, Certificate::Vi { point, .. }, Some(f)) => (f.clone(), point),
        (Mode::Gnd, Certificate::Equilibrium(c), Some(f)) if !p.spec.weak_form => (f.clone(), &c.price),
        (Mode::Brouwer, Certificate::FixedPoint(r), Some(f)) => (f.displacement(), &r.point),
        (_, Certificate::Failed { .. }, _) => return empty("solver failed; nothing to compare"),
        _ => return empty("the grid oracle covers single-map HS problems only"),
    };
    let grid = match grid_hs_oracle(&p.set, &f, GridSpec::default()) {
        Ok(g) => g,
        Err(e) => return empty(&e.to_string()),
    };
    let lipschitz = continuity_probe(&f, &p.set, 64, 1e-6, p.spec.solver.seed).ok().map(|r| r.max_ratio);
    let solver_residual = hs_residual(&p.set, &f, point).ok();
    let agreement = match (solver_residual, lipschitz) {
        (Some(r), Some(l)) => Some(r <= grid.residual + grid.spacing * l + 1e-6),
        _ => None,
    };
    OracleBlock {
        oracle: true,
        grid: Some(grid),
        lipschitz_estimate: lipschitz,
        solver_residual,
        agreement,
        note: None,
    }
}

pub fn write_trace(path: &Path, trace: &[TraceEntry], dim: usize) -> Result<()> {
    let io = |e: csv::Error| CliError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["iter".to_string(), "residual".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(io)?;
    for t in trace {
        let mut row = vec![t.iter.to_string(), t.residual.to_string()];
        row.extend(t.point.iter().map(|c| c.to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn run(spec: &ProblemSpec, opts: &RunOptions) -> Result<RunReport> {
    let started = std::time::Instant::now();
    let spec = opts.apply(spec);
    let problem = spec.build()?;
    let solved = solve(&problem)?;
    let checks = verify_certificate(&problem, spec.mode, &solved.certificate);
    let trace_path = match &opts.trace {
        Some(path) => {
            write_trace(path, &solved.trace, problem.dim())?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let oracle = opts.oracle.then(|| oracle_block(&problem, &solved.certificate));
    Ok(RunReport {
        format_version: FORMAT_VERSION.into(),
        library_version: env!("CARGO_PKG_VERSION").into(),
        mode: spec.mode,
        config: spec.solver.clone(),
        seed: spec.solver.seed,
        passed: checks.passed,
        checks,
        certificate: solved.certificate,
        warnings: solved.warnings,
        trace_path,
        oracle,
        problem: spec,
        wall_time_ms: Some(started.elapsed().as_secs_f64() * 1e3),
    })
}

pub fn parse_report(text: &str) -> Result<RunReport> {
    crate::problem::from_json(text)
}

/// Re-checks a report against its embedded problem, or against `spec` when given.
pub fn verify_report(report: &RunReport, spec: Option<&ProblemSpec>) -> Result<VerifyReport> {
    let mut spec = spec.cloned().unwrap_or_else(|| report.problem.clone());
    spec.mode = report.mode;
    spec.solver = report.config.clone();
    let problem = spec.build()?;
    let checks = verify_certificate(&problem, report.mode, &report.certificate);
    Ok(VerifyReport {
        format_version: FORMAT_VERSION.into(),
        mode: report.mode,
        passed: checks.passed,
        checks,
    })
}

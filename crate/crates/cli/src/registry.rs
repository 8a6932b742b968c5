//! Built-in problems addressed by name.

use vieq_core::vi_solver::SolverConfig;

use crate::error::{CliError, Result};
use crate::problem::{AgentSpec, ConeSpec, CorrespondenceSpec, MapSpec, Mode, ProblemSpec, SetSpec, FORMAT_VERSION};

pub const BUILTIN_NAMES: [&str; 9] = [
    "neg-identity-simplex",
    "neg-identity-ball",
    "rotation-ball",
    "two-good-exchange",
    "cobb-douglas-2x2",
    "orthant-neg-identity",
    "ray-cone-demo",
    "step-correspondence",
    "constant-correspondence",
];

/// Width of the steep transition in `step-correspondence`.
pub const STEP_WIDTH: f64 = 1e-3;

fn base(name: &str, mode: Mode) -> ProblemSpec {
    ProblemSpec {
        format_version: FORMAT_VERSION.into(),
        name: Some(name.into()),
        mode,
        set: None,
        cone: None,
        map: None,
        correspondence: None,
        weak_form: false,
        points: None,
        solver: SolverConfig::default(),
    }
}

fn builtin_map(name: &str) -> MapSpec {
    MapSpec::Builtin {
        name: name.into(),
        params: Vec::new(),
    }
}

fn economy(agents: &[([f64; 2], [f64; 2])]) -> MapSpec {
    MapSpec::Economy {
        agents: agents
            .iter()
            .map(|(s, w)| AgentSpec {
                shares: s.to_vec(),
                endowment: w.to_vec(),
            })
            .collect(),
        floor: None,
    }
}

fn ramp(start: f64) -> MapSpec {
    MapSpec::Interval {
        inner: Box::new(MapSpec::Builtin {
            name: "ramp".into(),
            params: vec![start, STEP_WIDTH, 0.75, 0.25],
        }),
    }
}

/// The named problem; `dim` only applies to `neg-identity-simplex`.
pub fn builtin_with_dim(name: &str, dim: Option<usize>) -> Result<ProblemSpec> {
    if dim.is_some() && name != "neg-identity-simplex" {
        return Err(CliError::Usage(format!("`{name}` has a fixed dimension")));
    }
    let spec = match name {
        "neg-identity-simplex" => ProblemSpec {
            set: Some(SetSpec::Simplex { dim: dim.unwrap_or(2) }),
            map: Some(builtin_map("neg-identity")),
            ..base(name, Mode::Vi)
        },
        "neg-identity-ball" => ProblemSpec {
            set: Some(SetSpec::Ball { dim: 2 }),
            map: Some(builtin_map("neg-identity")),
            ..base(name, Mode::Vi)
        },
        "rotation-ball" => ProblemSpec {
            set: Some(SetSpec::Ball { dim: 2 }),
            map: Some(builtin_map("rotation")),
            ..base(name, Mode::Vi)
        },
        "two-good-exchange" => ProblemSpec {
            map: Some(economy(&[([0.5, 0.5], [1.0, 0.0]), ([0.5, 0.5], [0.0, 1.0])])),
            ..base(name, Mode::Gnd)
        },
        "cobb-douglas-2x2" => ProblemSpec {
            map: Some(economy(&[([0.3, 0.7], [1.0, 2.0]), ([0.6, 0.4], [2.0, 1.0])])),
            ..base(name, Mode::Gnd)
        },
        "orthant-neg-identity" => ProblemSpec {
            cone: Some(ConeSpec {
                dim: 2,
                generators: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            }),
            map: Some(builtin_map("neg-identity")),
            ..base(name, Mode::GndGeneral)
        },
        // ζ(p) = (-1, 5 - p₀) on the ray through (1, 0)
        "ray-cone-demo" => ProblemSpec {
            cone: Some(ConeSpec {
                dim: 2,
                generators: vec![vec![1.0, 0.0]],
            }),
            map: Some(MapSpec::Affine {
                a: vec![vec![0.0, 0.0], vec![-1.0, 0.0]],
                b: vec![-1.0, 5.0],
            }),
            ..base(name, Mode::GndGeneral)
        },
        // 0.75 below 1/2 and 0.25 above, both branches meeting at 1/2
        "step-correspondence" => ProblemSpec {
            set: Some(SetSpec::Interval),
            correspondence: Some(CorrespondenceSpec {
                branches: vec![ramp(0.5), ramp(0.5 - STEP_WIDTH)],
            }),
            ..base(name, Mode::Kakutani)
        },
        "constant-correspondence" => ProblemSpec {
            set: Some(SetSpec::Simplex { dim: 2 }),
            correspondence: Some(CorrespondenceSpec {
                branches: vec![
                    MapSpec::Constant { value: vec![-1.0, 0.0] },
                    MapSpec::Constant { value: vec![0.0, -1.0] },
                ],
            }),
            ..base(name, Mode::Vi)
        },
        other => {
            return Err(CliError::Usage(format!(
                "unknown builtin `{other}`; available: {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(spec)
}

pub fn builtin(name: &str) -> Result<ProblemSpec> {
    builtin_with_dim(name, None)
}

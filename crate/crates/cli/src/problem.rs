//! Problem documents: the set, cone, map or correspondence, solver settings
//! and mode, validated into solver-ready oracles.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vieq_core::equilibrium::{interval, CobbDouglasEconomy};
use vieq_core::vi_solver::SolverConfig;
use vieq_core::{ConvexCompactSet, CorrespondenceOracle, MapOracle, PolyhedralCone, Vector};

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Vi,
    Gnd,
    GndGeneral,
    Brouwer,
    Kakutani,
    Retract,
    Verify,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| CliError::Usage(format!("unknown mode `{s}`")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Vi => "vi",
            Mode::Gnd => "gnd",
            Mode::GndGeneral => "gnd-general",
            Mode::Brouwer => "brouwer",
            Mode::Kakutani => "kakutani",
            Mode::Retract => "retract",
            Mode::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Simplex { dim: usize },
    Ball { dim: usize },
    /// `[0, 1]`, handled as the simplex in `R^2` through `x ↦ (x, 1 - x)`.
    Interval,
    /// `B̄ ∩ P` for the problem's cone.
    BallCapCone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub dim: usize,
    pub generators: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coef: f64,
    pub powers: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub shares: Vec<f64>,
    pub endowment: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    /// `neg-identity`, `identity`, `rotation` (planar, `x ↦ (-x₁, x₀)`) or
    /// `ramp` (scalar; params `[start, width, from, to]`).
    Builtin {
        name: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        params: Vec<f64>,
    },
    Constant { value: Vec<f64> },
    Affine { a: Vec<Vec<f64>>, b: Vec<f64> },
    /// One list of monomials per output coordinate.
    Polynomial { outputs: Vec<Vec<Term>> },
    /// Cobb–Douglas exchange economy, excess demand with a price floor.
    Economy {
        agents: Vec<AgentSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        floor: Option<f64>,
    },
    /// `x ↦ π_K(inner(x))` for the problem set `K`.
    Projected { inner: Box<MapSpec> },
    /// A scalar map on `[0, 1]` lifted to the embedded interval.
    Interval { inner: Box<MapSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceSpec {
    pub branches: Vec<MapSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub format_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correspondence: Option<CorrespondenceSpec>,
    /// Restrict values to `{z : <p, z> <= 0}` before solving (simplex GND).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub weak_form: bool,
    /// Inputs for `retract`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// A validated problem with its oracles built.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub set: ConvexCompactSet,
    pub cone: Option<PolyhedralCone>,
    pub map: Option<MapOracle>,
    pub zeta: Option<CorrespondenceOracle>,
    pub points: Vec<Vector>,
}

impl Problem {
    /// The correspondence, or the single-branch one of the map.
    pub fn correspondence(&self) -> Option<CorrespondenceOracle> {
        self.zeta
            .clone()
            .or_else(|| self.map.clone().map(CorrespondenceOracle::from_map))
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }
}

pub fn load_problem(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_problem(&text)
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec> {
    let spec: ProblemSpec = from_json(text)?;
    spec.build()?;
    Ok(spec)
}

/// Deserializes with the offending field path in the error.
pub(crate) fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            CliError::Parse(inner.to_string())
        } else {
            CliError::schema(path, inner.to_string())
        }
    })
}

pub fn emit(spec: &ProblemSpec) -> String {
    serde_json::to_string_pretty(spec).expect("problem specs always serialize")
}

fn vector(coords: &[f64], path: &str) -> Result<Vector> {
    Vector::from_slice(coords).map_err(|e| CliError::schema(path, e.to_string()))
}

fn expect_dim(path: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(CliError::Dimension(format!("{path}: expected dimension {expected}, got {got}")))
    }
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Problem> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::schema(
                "format_version",
                format!("unsupported version `{}`, expected `{FORMAT_VERSION}`", self.format_version),
            ));
        }
        self.solver
            .validate()
            .map_err(|e| CliError::schema("solver", e.to_string()))?;

        let cone = match &self.cone {
            Some(c) => {
                let gens = c
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(i, g)| {
                        let path = format!("cone.generators[{i}]");
                        expect_dim(&path, c.dim, g.len())?;
                        vector(g, &path)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(
                    PolyhedralCone::from_generators(c.dim, gens)
                        .map_err(|e| CliError::schema("cone", e.to_string()))?,
                )
            }
            None => None,
        };

        let needs_cone = matches!(self.mode, Mode::GndGeneral | Mode::Retract)
            || matches!(self.set, Some(SetSpec::BallCapCone));
        if needs_cone && cone.is_none() {
            return Err(CliError::schema("cone", format!("required for mode `{}`", self.mode.name())));
        }

        let set = match (&self.set, self.mode, &cone) {
            (_, Mode::GndGeneral | Mode::Retract, Some(c)) | (Some(SetSpec::BallCapCone), _, Some(c)) => {
                if !matches!(self.set, None | Some(SetSpec::BallCapCone)) {
                    return Err(CliError::schema("set", "the cone modes work on the ball cap of the cone"));
                }
                ConvexCompactSet::ball_cap_cone(c.clone())
            }
            (Some(SetSpec::Simplex { dim }), _, _) => ConvexCompactSet::simplex(*dim)?,
            (Some(SetSpec::Ball { dim }), _, _) => ConvexCompactSet::ball(*dim)?,
            (Some(SetSpec::Interval), _, _) => ConvexCompactSet::simplex(2)?,
            (None, Mode::Gnd, _) => ConvexCompactSet::simplex(self.value_dim()?)?,
            (None, _, _) => return Err(CliError::schema("set", format!("required for mode `{}`", self.mode.name()))),
            (Some(SetSpec::BallCapCone), _, None) => unreachable!("checked above"),
        };
        if self.mode == Mode::Gnd && !matches!(set, ConvexCompactSet::Simplex { .. }) {
            return Err(CliError::schema("set", "gnd works on the price simplex"));
        }
        let dim = set.dim();

        let map = self
            .map
            .as_ref()
            .map(|m| build_map(m, dim, &set, "map"))
            .transpose()?;
        let zeta = match &self.correspondence {
            Some(c) => {
                let branches = c
                    .branches
                    .iter()
                    .enumerate()
                    .map(|(i, b)| build_map(b, dim, &set, &format!("correspondence.branches[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                Some(
                    CorrespondenceOracle::new(branches)
                        .map_err(|e| CliError::schema("correspondence.branches", e.to_string()))?,
                )
            }
            None => None,
        };
        if map.is_some() && zeta.is_some() {
            return Err(CliError::schema("map", "give either a map or a correspondence, not both"));
        }
        match self.mode {
            Mode::Brouwer if map.is_none() => return Err(CliError::schema("map", "required for mode `brouwer`")),
            Mode::Vi | Mode::Gnd | Mode::GndGeneral | Mode::Kakutani if map.is_none() && zeta.is_none() => {
                return Err(CliError::schema("map", format!("a map or correspondence is required for mode `{}`", self.mode.name())));
            }
            _ => {}
        }

        let points = match (&self.points, self.mode) {
            (Some(pts), _) => pts
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let path = format!("points[{i}]");
                    expect_dim(&path, dim, p.len())?;
                    vector(p, &path)
                })
                .collect::<Result<Vec<_>>>()?,
            (None, Mode::Retract) => return Err(CliError::schema("points", "required for mode `retract`")),
            (None, _) => Vec::new(),
        };

        Ok(Problem {
            spec: self.clone(),
            set,
            cone,
            map,
            zeta,
            points,
        })
    }

    /// Dimension implied by the map or first branch when no set is given.
    fn value_dim(&self) -> Result<usize> {
        let m = self
            .map
            .as_ref()
            .or_else(|| self.correspondence.as_ref().and_then(|c| c.branches.first()))
            .ok_or_else(|| CliError::schema("map", "a map or correspondence is required"))?;
        match m {
            MapSpec::Constant { value } => Ok(value.len()),
            MapSpec::Affine { b, .. } => Ok(b.len()),
            MapSpec::Polynomial { outputs } => Ok(outputs.len()),
            MapSpec::Economy { agents, .. } => agents
                .first()
                .map(|a| a.shares.len())
                .ok_or_else(|| CliError::schema("map.agents", "at least one agent is required")),
            MapSpec::Interval { .. } => Ok(2),
            MapSpec::Builtin { .. } | MapSpec::Projected { .. } => Err(CliError::schema(
                "set",
                "cannot infer the dimension from this map; give the set",
            )),
        }
    }
}

fn build_map(m: &MapSpec, dim: usize, set: &ConvexCompactSet, path: &str) -> Result<MapOracle> {
    let f = match m {
        MapSpec::Builtin { name, params } => {
            let need = |n: usize| {
                if params.len() == n {
                    Ok(())
                } else {
                    Err(CliError::schema(format!("{path}.params"), format!("`{name}` takes {n} parameters")))
                }
            };
            match name.as_str() {
                "neg-identity" => {
                    need(0)?;
                    MapOracle::neg_identity(dim)
                }
                "identity" => {
                    need(0)?;
                    MapOracle::new(dim, "identity", |x| x.to_vec())
                }
                "rotation" => {
                    need(0)?;
                    expect_dim(path, 2, dim)?;
                    MapOracle::new(2, "rotation", |x| vec![-x[1], x[0]])
                }
                "ramp" => {
                    need(4)?;
                    expect_dim(path, 1, dim)?;
                    let (start, width, from, to) = (params[0], params[1], params[2], params[3]);
                    if width.is_nan() || width <= 0.0 {
                        return Err(CliError::schema(format!("{path}.params"), "ramp width must be positive"));
                    }
                    MapOracle::new(1, format!("ramp{params:?}"), move |x| {
                        vec![from + (to - from) * ((x[0] - start) / width).clamp(0.0, 1.0)]
                    })
                }
                other => {
                    return Err(CliError::schema(
                        format!("{path}.name"),
                        format!("unknown builtin map `{other}` (expected neg-identity, identity, rotation or ramp)"),
                    ))
                }
            }
        }
        MapSpec::Constant { value } => MapOracle::constant(vector(value, &format!("{path}.value"))?),
        MapSpec::Affine { a, b } => {
            MapOracle::affine(a.clone(), b.clone()).map_err(|e| CliError::schema(path, e.to_string()))?
        }
        MapSpec::Polynomial { outputs } => {
            for (i, terms) in outputs.iter().enumerate() {
                for (j, t) in terms.iter().enumerate() {
                    expect_dim(&format!("{path}.outputs[{i}][{j}].powers"), outputs.len(), t.powers.len())?;
                    if !t.coef.is_finite() {
                        return Err(CliError::schema(format!("{path}.outputs[{i}][{j}].coef"), "must be finite"));
                    }
                }
            }
            let outputs = outputs.clone();
            MapOracle::new(outputs.len(), "polynomial", move |x| {
                outputs
                    .iter()
                    .map(|terms| {
                        terms
                            .iter()
                            .map(|t| t.coef * t.powers.iter().zip(x).map(|(&p, c)| c.powi(p as i32)).product::<f64>())
                            .sum()
                    })
                    .collect()
            })
        }
        MapSpec::Economy { agents, floor } => {
            if agents.is_empty() {
                return Err(CliError::schema(format!("{path}.agents"), "at least one agent is required"));
            }
            let n = agents[0].shares.len();
            for (i, a) in agents.iter().enumerate() {
                let p = format!("{path}.agents[{i}]");
                expect_dim(&format!("{p}.shares"), n, a.shares.len())?;
                expect_dim(&format!("{p}.endowment"), n, a.endowment.len())?;
                let sum: f64 = a.shares.iter().sum();
                if a.shares.iter().any(|s| s.is_nan() || *s < 0.0) || (sum - 1.0).abs() > 1e-9 {
                    return Err(CliError::schema(format!("{p}.shares"), "shares must lie on the simplex"));
                }
                if a.endowment.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || a.endowment.iter().all(|w| *w == 0.0) {
                    return Err(CliError::schema(format!("{p}.endowment"), "endowments must be nonnegative and nonzero"));
                }
            }
            let shares = agents.iter().map(|a| vector(&a.shares, path)).collect::<Result<Vec<_>>>()?;
            let endow = agents.iter().map(|a| vector(&a.endowment, path)).collect::<Result<Vec<_>>>()?;
            let e = match floor {
                Some(fl) => CobbDouglasEconomy::with_floor(shares, endow, *fl),
                None => CobbDouglasEconomy::new(shares, endow),
            }
            .map_err(|e| CliError::schema(path, e.to_string()))?;
            e.to_map_oracle()
        }
        MapSpec::Projected { inner } => {
            let g = build_map(inner, dim, set, &format!("{path}.inner"))?;
            let k = set.clone();
            MapOracle::new(dim, format!("proj o {}", g.descriptor()), move |x| {
                let y = Vector::from_slice(x).and_then(|v| g.eval(&v)).and_then(|y| k.project(&y));
                match y {
                    Ok(p) => p.point.into_inner(),
                    Err(_) => vec![f64::NAN; x.len()],
                }
            })
        }
        MapSpec::Interval { inner } => {
            expect_dim(path, 2, dim)?;
            let g = build_map(inner, 1, set, &format!("{path}.inner"))?;
            let label = format!("interval({})", g.descriptor());
            interval::interval_map(&label, move |t| {
                Vector::from_slice(&[t])
                    .and_then(|x| g.eval(&x))
                    .map_or(f64::NAN, |y| y[0])
            })
        }
    };
    expect_dim(path, dim, f.dim())?;
    Ok(f)
}

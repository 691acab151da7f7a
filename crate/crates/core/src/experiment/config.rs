use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::follower::presets::{admissible_kappa, standard_profile, vanishing_target};
use crate::follower::{validate_config, Configuration, Geometry, ProblemData, RobustParams, ScenarioConfig};
use crate::hum::{HumSettings, PenaltyKind};
use crate::pde::{BoundarySet, Region, SpatialGrid, TimeGrid};
use crate::weights::WeightSpec;

/// Problems found while reading a configuration file.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown section [{name}]{}", hint(.suggestion))]
    UnknownSection { name: String, suggestion: Option<String> },
    #[error("unknown key `{key}` in [{section}]{}{}", at(.line), hint(.suggestion))]
    UnknownKey { section: String, key: String, suggestion: Option<String>, line: Option<usize> },
    #[error("missing key `{key}` in [{section}]")]
    Missing { section: String, key: String },
    #[error("invalid value for `{key}` in [{section}]: {message}")]
    Invalid { section: String, key: String, message: String },
}

fn hint(s: &Option<String>) -> String {
    s.as_ref().map(|k| format!(" (did you mean `{k}`?)")).unwrap_or_default()
}

fn at(line: &Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

/// Closest candidate by Levenshtein distance, if reasonably close.
pub fn nearest<'a>(word: &str, candidates: &[&'a str]) -> Option<&'a str> {
    candidates
        .iter()
        .map(|c| (strsim::levenshtein(word, c), *c))
        .min()
        .filter(|(d, c)| *d <= c.len().max(word.len()).div_ceil(2))
        .map(|(_, c)| c)
}

/// Grid sizes and the refinement ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSettings {
    pub n_interior: usize,
    pub n_steps: usize,
    /// Interior node counts for the convergence study, strictly increasing.
    pub ladder: Vec<usize>,
    /// Largest equilibrium system handed to the dense oracle.
    pub oracle_max_unknowns: usize,
}

/// Output directory, seed and sampling sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub seed: u64,
    pub perturbations: usize,
    pub probe_samples: usize,
}

/// Fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: ScenarioConfig,
    pub robust: RobustParams,
    pub hum: HumSettings,
    pub epsilon_ladder: Vec<f64>,
    pub weights: WeightSpec,
    pub grid: GridSettings,
    pub output: OutputSettings,
    /// Amplitudes used to rebuild the data on other grids.
    pub data: DataSettings,
}

/// `y₀ = initial · sin(πx/L)` and vanishing targets of the given amplitude and rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataSettings {
    pub initial: f64,
    pub target: f64,
    pub kappa: f64,
}

const SECTIONS: [&str; 6] = ["scenario", "robust", "hum", "weights", "grid", "output"];
const SCENARIO_KEYS: [&str; 16] = [
    "configuration",
    "length",
    "horizon",
    "theta",
    "omega",
    "follower",
    "followers",
    "leader",
    "control",
    "disturbance",
    "observation",
    "observations",
    "initial_amplitude",
    "target_amplitude",
    "target_kappa",
    "name",
];
const ROBUST_KEYS: [&str; 4] = ["ell", "gamma", "tol", "max_iterations"];
const HUM_KEYS: [&str; 5] = ["epsilon", "cg_tol", "cg_max_iterations", "penalty", "epsilon_ladder"];
const WEIGHT_KEYS: [&str; 3] = ["lambda", "s", "m"];
const GRID_KEYS: [&str; 4] = ["n_interior", "n_steps", "ladder", "oracle_max_unknowns"];
const OUTPUT_KEYS: [&str; 4] = ["dir", "seed", "perturbations", "probe_samples"];

/// Line of the first `key = ...` assignment in the source, 1-based.
fn locate(source: &str, key: &str) -> Option<usize> {
    source.lines().position(|l| {
        let t = l.trim_start();
        t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn check_keys(&self, allowed: &[&str], source: &str) -> std::result::Result<(), ConfigError> {
        if let Some(t) = self.table {
            for key in t.keys() {
                if !allowed.contains(&key.as_str()) {
                    return Err(ConfigError::UnknownKey {
                        section: self.name.into(),
                        key: key.clone(),
                        suggestion: nearest(key, allowed).map(str::to_owned),
                        line: locate(source, key),
                    });
                }
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid { section: self.name.into(), key: key.into(), message: message.into() }
    }

    fn float(&self, key: &str, default: Option<f64>) -> std::result::Result<f64, ConfigError> {
        match self.get(key) {
            Some(Value::Float(f)) => Ok(*f),
            Some(Value::Integer(i)) => Ok(*i as f64),
            Some(_) => Err(self.invalid(key, "expected a number")),
            None => default.ok_or_else(|| ConfigError::Missing { section: self.name.into(), key: key.into() }),
        }
    }

    fn uint(&self, key: &str, default: u64) -> std::result::Result<u64, ConfigError> {
        match self.get(key) {
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as u64),
            Some(_) => Err(self.invalid(key, "expected a nonnegative integer")),
            None => Ok(default),
        }
    }

    fn string(&self, key: &str) -> std::result::Result<Option<&'a str>, ConfigError> {
        match self.get(key) {
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.invalid(key, "expected a string")),
            None => Ok(None),
        }
    }

    fn require<T>(&self, key: &str, v: Option<T>) -> std::result::Result<T, ConfigError> {
        v.ok_or_else(|| ConfigError::Missing { section: self.name.into(), key: key.into() })
    }

    fn region_value(&self, key: &str, v: &Value) -> std::result::Result<Region, ConfigError> {
        let Value::Table(t) = v else {
            return Err(self.invalid(key, "expected a region `{ a = .., b = .. }`"));
        };
        if let Some(extra) = t.keys().find(|k| *k != "a" && *k != "b") {
            return Err(ConfigError::UnknownKey {
                section: format!("{}.{key}", self.name),
                key: extra.clone(),
                suggestion: nearest(extra, &["a", "b"]).map(str::to_owned),
                line: None,
            });
        }
        let num = |k: &str| match t.get(k) {
            Some(Value::Float(f)) => Ok(*f),
            Some(Value::Integer(i)) => Ok(*i as f64),
            _ => Err(self.invalid(key, format!("region endpoint `{k}` must be a number"))),
        };
        let (a, b) = (num("a")?, num("b")?);
        Region::new(a, b).map_err(|e| self.invalid(key, e.to_string()))
    }

    fn region(&self, key: &str) -> std::result::Result<Region, ConfigError> {
        let v = self.require(key, self.get(key))?;
        self.region_value(key, v)
    }

    fn boundary_value(&self, key: &str, v: &Value) -> std::result::Result<BoundarySet, ConfigError> {
        match v.as_str() {
            Some("left") => Ok(BoundarySet::LEFT),
            Some("right") => Ok(BoundarySet::RIGHT),
            Some("both") => Ok(BoundarySet::ALL),
            Some(other) => Err(self.invalid(
                key,
                format!("unknown boundary `{other}`{}", hint(&nearest(other, &["left", "right", "both"]).map(str::to_owned))),
            )),
            None => Err(self.invalid(key, "expected \"left\", \"right\" or \"both\"")),
        }
    }

    fn boundary(&self, key: &str) -> std::result::Result<BoundarySet, ConfigError> {
        let v = self.require(key, self.get(key))?;
        self.boundary_value(key, v)
    }

    fn pair<T>(
        &self,
        key: &str,
        each: impl Fn(&Self, &Value) -> std::result::Result<T, ConfigError>,
    ) -> std::result::Result<[T; 2], ConfigError> {
        let v = self.require(key, self.get(key))?;
        match v.as_array().map(Vec::as_slice) {
            Some([a, b]) => Ok([each(self, a)?, each(self, b)?]),
            _ => Err(self.invalid(key, "expected a list of two entries")),
        }
    }

    fn float_list(&self, key: &str) -> std::result::Result<Option<Vec<f64>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Float(f) => Ok(*f),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(self.invalid(key, "expected a list of numbers")),
                })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(self.invalid(key, "expected a list of numbers")),
        }
    }
}

fn parse_error(source: &str, e: &toml::de::Error) -> ConfigError {
    let (line, column) = match e.span() {
        Some(span) => {
            let before = &source[..span.start.min(source.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    ConfigError::Parse { line, column, message: e.message().to_owned() }
}

/// Reads and validates an experiment file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
    let path = path.as_ref();
    let source = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    parse_config_str(&source)
}

/// Same as [`parse_config`] for text already in memory.
pub fn parse_config_str(source: &str) -> Result<ExperimentSpec> {
    let root: Table = source.parse::<Table>().map_err(|e| parse_error(source, &e))?;
    for (name, v) in &root {
        if !SECTIONS.contains(&name.as_str()) || !v.is_table() {
            return Err(ConfigError::UnknownSection {
                name: name.clone(),
                suggestion: nearest(name, &SECTIONS).map(str::to_owned),
            }
            .into());
        }
    }
    let section = |name: &'static str| Section { name, table: root.get(name).and_then(Value::as_table) };
    let (sc, rb, hm, wt, gr, out) =
        (section("scenario"), section("robust"), section("hum"), section("weights"), section("grid"), section("output"));
    sc.check_keys(&SCENARIO_KEYS, source)?;
    rb.check_keys(&ROBUST_KEYS, source)?;
    hm.check_keys(&HUM_KEYS, source)?;
    wt.check_keys(&WEIGHT_KEYS, source)?;
    gr.check_keys(&GRID_KEYS, source)?;
    out.check_keys(&OUTPUT_KEYS, source)?;

    let configuration = match sc.require("configuration", sc.string("configuration")?)? {
        "A" | "a" => Configuration::A,
        "B" | "b" => Configuration::B,
        "C" | "c" => Configuration::C,
        "D" | "d" => Configuration::D,
        other => return Err(sc.invalid("configuration", format!("expected A, B, C or D, got `{other}`")).into()),
    };
    let length = sc.float("length", Some(1.0))?;
    let horizon = sc.float("horizon", Some(1.0))?;
    let theta = sc.float("theta", Some(0.5))?;
    let allowed: &[&str] = match configuration {
        Configuration::A => &["omega", "follower", "observation"],
        Configuration::B => &["leader", "control", "disturbance", "observation"],
        Configuration::C => &["leader", "follower", "observation"],
        Configuration::D => &["leader", "followers", "observations"],
    };
    let geometric = ["omega", "follower", "followers", "leader", "control", "disturbance", "observation", "observations"];
    if let Some(t) = sc.table {
        if let Some(k) = t.keys().find(|k| geometric.contains(&k.as_str()) && !allowed.contains(&k.as_str())) {
            return Err(sc
                .invalid(k, format!("not used by configuration {}; expected {}", configuration.letter(), allowed.join(", ")))
                .into());
        }
    }
    let geometry = match configuration {
        Configuration::A => Geometry::A {
            omega: sc.region("omega")?,
            follower: sc.boundary("follower")?,
            observation: sc.region("observation")?,
        },
        Configuration::B => Geometry::B {
            leader: sc.boundary("leader")?,
            control: sc.region("control")?,
            disturbance: sc.region("disturbance")?,
            observation: sc.region("observation")?,
        },
        Configuration::C => Geometry::C {
            leader: sc.boundary("leader")?,
            follower: sc.boundary("follower")?,
            observation: sc.region("observation")?,
        },
        Configuration::D => Geometry::D {
            leader: sc.boundary("leader")?,
            followers: sc.pair("followers", |s, v| s.boundary_value("followers", v))?,
            observations: sc.pair("observations", |s, v| s.region_value("observations", v))?,
        },
    };

    let lambda = wt.float("lambda", Some(1.0))?;
    let s = wt.float("s", Some(1.0))?;
    let m = wt.uint("m", 4)?;
    let m = u32::try_from(m).map_err(|_| wt.invalid("m", "too large"))?;
    let weights = WeightSpec::new(lambda, s, m, horizon, standard_profile(&geometry, length)?)?;

    let robust = RobustParams {
        ell: rb.float("ell", Some(10.0))?,
        gamma: rb.float("gamma", Some(10.0))?,
        tol: rb.float("tol", Some(RobustParams::DEFAULT_TOL))?,
        max_iterations: rb.uint("max_iterations", RobustParams::DEFAULT_MAX_ITERATIONS as u64)? as usize,
    }
    .validated()?;

    let penalty = match hm.string("penalty")? {
        None | Some("squared_norm") => PenaltyKind::SquaredNorm,
        Some(other) => {
            return Err(hm
                .invalid("penalty", format!("unknown penalty `{other}`{}", hint(&nearest(other, &["squared_norm"]).map(str::to_owned))))
                .into())
        }
    };
    let hum = HumSettings {
        epsilon: hm.float("epsilon", Some(1e-4))?,
        cg_tol: hm.float("cg_tol", Some(1e-10))?,
        cg_max_iterations: hm.uint("cg_max_iterations", 1000)? as usize,
        penalty,
    }
    .validated()?;
    let epsilon_ladder = hm.float_list("epsilon_ladder")?.unwrap_or_else(|| vec![1e-2, 1e-4, 1e-6]);
    if epsilon_ladder.is_empty() || epsilon_ladder.iter().any(|e| e.is_nan() || *e <= 0.0) {
        return Err(hm.invalid("epsilon_ladder", "expected a nonempty list of positive numbers").into());
    }

    let n_interior = gr.uint("n_interior", 50)? as usize;
    let n_steps = gr.uint("n_steps", 50)? as usize;
    let ladder: Vec<usize> = match gr.get("ladder") {
        None => vec![25, 50, 100],
        Some(Value::Array(a)) => a
            .iter()
            .map(|v| match v {
                Value::Integer(i) if *i > 0 => Ok(*i as usize),
                _ => Err(gr.invalid("ladder", "expected a list of positive integers")),
            })
            .collect::<std::result::Result<_, _>>()?,
        Some(_) => return Err(gr.invalid("ladder", "expected a list of positive integers").into()),
    };
    if ladder.len() < 3 {
        return Err(gr.invalid("ladder", "an observed order needs at least three grids").into());
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(gr.invalid("ladder", "the refinement ladder must be strictly increasing").into());
    }
    let grid = GridSettings {
        n_interior,
        n_steps,
        ladder,
        oracle_max_unknowns: gr.uint("oracle_max_unknowns", 1500)? as usize,
    };

    let output = OutputSettings {
        dir: PathBuf::from(out.string("dir")?.unwrap_or("out")),
        seed: out.uint("seed", 0)?,
        perturbations: out.uint("perturbations", 100)? as usize,
        probe_samples: out.uint("probe_samples", 100)? as usize,
    };

    let data = DataSettings {
        initial: sc.float("initial_amplitude", Some(1.0))?,
        target: sc.float("target_amplitude", Some(0.5))?,
        kappa: sc.float("target_kappa", Some(1.05 * admissible_kappa(lambda, s)))?,
    };
    let scenario = build_scenario(geometry, length, horizon, theta, n_interior, n_steps, weights, &data)?;
    Ok(ExperimentSpec { scenario, robust, hum, epsilon_ladder, weights, grid, output, data })
}

/// Scenario on the given grid with data generated from the amplitudes.
#[allow(clippy::too_many_arguments)]
pub(crate) fn build_scenario(
    geometry: Geometry,
    length: f64,
    horizon: f64,
    theta: f64,
    n_interior: usize,
    n_steps: usize,
    weights: WeightSpec,
    data: &DataSettings,
) -> Result<ScenarioConfig> {
    let space = SpatialGrid::new(length, n_interior)?;
    let time = TimeGrid::new(horizon, n_steps)?;
    let mut initial: Vec<f64> =
        (0..space.n_nodes()).map(|i| data.initial * (std::f64::consts::PI * space.x(i) / length).sin()).collect();
    let last = initial.len() - 1;
    initial[0] = 0.0;
    initial[last] = 0.0;
    let targets = geometry
        .observations()
        .iter()
        .map(|r| match r.mask(&space) {
            Ok(_) => vanishing_target(space, time, r, data.target, data.kappa),
            Err(_) => Ok(crate::pde::SpaceTimeField::zeros(space, time)),
        })
        .collect::<Result<Vec<_>>>()?;
    let cfg = ScenarioConfig { geometry, space, time, theta, data: ProblemData { initial, targets }, weights };
    validate_config(&cfg)?;
    Ok(cfg)
}

impl ExperimentSpec {
    /// The scenario rebuilt on another grid, with the same geometry and data amplitudes.
    pub fn scenario_on(&self, n_interior: usize, n_steps: usize) -> Result<ScenarioConfig> {
        let sc = &self.scenario;
        build_scenario(
            sc.geometry.clone(),
            sc.space.length(),
            sc.time.horizon(),
            sc.theta,
            n_interior,
            n_steps,
            self.weights,
            &self.data,
        )
    }
}

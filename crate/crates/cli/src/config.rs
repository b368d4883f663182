//! Experiment configuration: presets, TOML files and command-line overrides.
//!
//! Resolution order is preset defaults, then the file, then flags. The
//! resolved config is what gets embedded in every artifact.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use adaptmpc_core::env::PhysicalParams;
use adaptmpc_core::hetbo::{BoConfig, CmaEsOptions, Dim, Method, SearchSpace};
use adaptmpc_core::task::{TaskKind, POINT_DIMS};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Rollout count divisor of the desk preset.
pub const DESK_ROLLOUT_DIVISOR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Full-scale settings of the reference experiments.
    Paper,
    /// Reduced settings that finish in minutes on one core.
    Desk,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            other => Err(format!("unknown preset `{other}` (expected paper or desk)")),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    fn new((lower, upper): (f64, f64)) -> Self {
        Self { lower, upper }
    }
}

/// Box bounds for each search dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub mu_mass: Bounds,
    pub sigma_mass: Bounds,
    pub mu_length: Bounds,
    pub sigma_length: Bounds,
    pub lambda: Bounds,
    pub sigma_eps: Bounds,
}

impl SpaceConfig {
    fn entries(&self) -> [(&'static str, Bounds, bool); 6] {
        [
            (POINT_DIMS[0], self.mu_mass, false),
            (POINT_DIMS[1], self.sigma_mass, true),
            (POINT_DIMS[2], self.mu_length, false),
            (POINT_DIMS[3], self.sigma_length, true),
            (POINT_DIMS[4], self.lambda, true),
            (POINT_DIMS[5], self.sigma_eps, true),
        ]
    }

    pub fn search_space(&self) -> SearchSpace {
        SearchSpace {
            dims: self
                .entries()
                .into_iter()
                .map(|(name, b, scale)| if scale { Dim::scale(name, b.lower, b.upper) } else { Dim::free(name, b.lower, b.upper) })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MppiSettings {
    pub horizon: usize,
    pub rollouts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSettings {
    /// Episodes averaged per objective evaluation.
    pub episodes: usize,
    /// Control steps per episode.
    pub steps: usize,
}

/// Parameters of the simulated "real" system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSettings {
    pub mass: f64,
    pub length: f64,
}

impl TruthSettings {
    pub fn params(&self) -> PhysicalParams {
        PhysicalParams { mass: self.mass, length: self.length }
    }
}

/// Point used for the dimensions a grid or evaluation does not set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferencePoint {
    pub mu_mass: f64,
    pub sigma_mass: f64,
    pub mu_length: f64,
    pub sigma_length: f64,
    pub lambda: f64,
    pub sigma_eps: f64,
}

impl ReferencePoint {
    pub fn to_point(&self) -> Vec<f64> {
        vec![self.mu_mass, self.sigma_mass, self.mu_length, self.sigma_length, self.lambda, self.sigma_eps]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub method: Method,
    pub preset: Preset,
    pub seeds: Vec<u64>,
    /// Acquisition-driven iterations after the initial batch.
    pub budget: usize,
    pub out: PathBuf,
    pub space: SpaceConfig,
    pub mppi: MppiSettings,
    pub evaluation: EvaluationSettings,
    pub bo: BoConfig,
    pub cma_es: CmaEsOptions,
    pub truth: TruthSettings,
    pub reference: ReferencePoint,
}

impl ExperimentConfig {
    pub fn preset(task: TaskKind, preset: Preset) -> Self {
        let d = task.defaults();
        let (rollouts, episodes, batch, degree, seeds) = match preset {
            Preset::Paper => (d.rollouts, d.episodes, 150, 10, vec![0]),
            Preset::Desk => (d.rollouts / DESK_ROLLOUT_DIVISOR, 5, 30, 3, (0..5).collect()),
        };
        let sigma_floor = d.sigma.0;
        Self {
            task,
            method: Method::HeteroBo,
            preset,
            seeds,
            budget: 50,
            out: PathBuf::from("runs"),
            space: SpaceConfig {
                mu_mass: Bounds::new(d.mu_mass),
                sigma_mass: Bounds::new(d.sigma),
                mu_length: Bounds::new(d.mu_length),
                sigma_length: Bounds::new(d.sigma),
                lambda: Bounds::new(d.lambda),
                sigma_eps: Bounds::new(d.sigma_eps),
            },
            mppi: MppiSettings { horizon: d.horizon, rollouts },
            evaluation: EvaluationSettings { episodes, steps: d.steps },
            bo: BoConfig { batch, degree, ..BoConfig::default() },
            cma_es: CmaEsOptions::default(),
            truth: TruthSettings { mass: 1.0, length: 1.0 },
            reference: ReferencePoint {
                mu_mass: 1.0,
                sigma_mass: sigma_floor,
                mu_length: 1.0,
                sigma_length: sigma_floor,
                lambda: 0.5,
                sigma_eps: 2.0,
            },
        }
    }

    pub fn search_space(&self) -> SearchSpace {
        self.space.search_space()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |field: &str, message: String| Err(HarnessError::config(field, message));
        for (name, b, _) in self.space.entries() {
            if !(b.lower.is_finite() && b.upper.is_finite()) {
                return err(&format!("space.{name}"), "bounds must be finite".into());
            }
            if b.lower <= 0.0 {
                return err(&format!("space.{name}.lower"), format!("must be positive, got {}", b.lower));
            }
            if b.lower >= b.upper {
                return err(&format!("space.{name}"), format!("lower {} is not below upper {}", b.lower, b.upper));
            }
        }
        if self.seeds.is_empty() {
            return err("seeds", "at least one seed is required".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return err("seeds", "seeds must be distinct".into());
        }
        for (field, v) in [
            ("mppi.horizon", self.mppi.horizon),
            ("mppi.rollouts", self.mppi.rollouts),
            ("evaluation.episodes", self.evaluation.episodes),
            ("evaluation.steps", self.evaluation.steps),
            ("bo.batch", self.bo.batch),
        ] {
            if v == 0 {
                return err(field, "must be at least 1".into());
            }
        }
        if !(self.bo.delta >= 0.0 && self.bo.delta.is_finite()) {
            return err("bo.delta", format!("must be finite and non-negative, got {}", self.bo.delta));
        }
        if !(self.bo.homo_noise_init > 0.0 && self.bo.homo_noise_init.is_finite()) {
            return err("bo.homo_noise_init", "must be positive".into());
        }
        if !(self.cma_es.initial_step > 0.0 && self.cma_es.initial_step.is_finite()) {
            return err("cma_es.initial_step", "must be positive".into());
        }
        for (field, v) in [("truth.mass", self.truth.mass), ("truth.length", self.truth.length)] {
            if !(v > 0.0 && v.is_finite()) {
                return err(field, format!("must be positive, got {v}"));
            }
        }
        let reference = self.reference.to_point();
        for (k, name) in POINT_DIMS.iter().enumerate() {
            if !(reference[k] > 0.0 && reference[k].is_finite()) {
                return err(&format!("reference.{name}"), format!("must be positive, got {}", reference[k]));
            }
        }
        Ok(())
    }
}

/// Values given on the command line; `None` keeps the file or preset value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub task: Option<TaskKind>,
    pub method: Option<Method>,
    pub preset: Option<Preset>,
    pub seeds: Option<Vec<u64>>,
    pub budget: Option<usize>,
    pub batch: Option<usize>,
    pub episodes: Option<usize>,
    pub rollouts: Option<usize>,
    pub steps: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Loads `file` (if any) over the preset defaults and applies `overrides`.
pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig, HarnessError> {
    let table = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            text.parse::<toml::Table>().map_err(|e| HarnessError::config("<file>", format!("{}: {}", path.display(), e.message())))?
        }
        None => toml::Table::new(),
    };
    resolve_table(table, overrides)
}

pub fn resolve_str(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, HarnessError> {
    let table = text.parse::<toml::Table>().map_err(|e| HarnessError::config("<file>", e.message().to_string()))?;
    resolve_table(table, overrides)
}

fn resolve_table(mut table: toml::Table, overrides: &Overrides) -> Result<ExperimentConfig, HarnessError> {
    let task = match overrides.task {
        Some(t) => t,
        None => parse_key(&table, "task")?.unwrap_or(TaskKind::Pendulum),
    };
    let preset = match overrides.preset {
        Some(p) => p,
        None => parse_key(&table, "preset")?.unwrap_or(Preset::Paper),
    };
    table.insert("task".into(), toml::Value::String(task.name().into()));
    table.insert("preset".into(), toml::Value::String(preset.to_string()));

    let base = toml::Table::try_from(ExperimentConfig::preset(task, preset))
        .map_err(|e| HarnessError::config("<preset>", e.to_string()))?;
    let mut merged = base;
    merge(&mut merged, table);

    let mut set = |path: &[&str], value: toml::Value| {
        let mut t = &mut merged;
        for key in &path[..path.len() - 1] {
            t = t.entry(*key).or_insert_with(|| toml::Value::Table(Default::default())).as_table_mut().expect("preset sections are tables");
        }
        t.insert(path[path.len() - 1].into(), value);
    };
    let int = |v: usize| toml::Value::Integer(v as i64);
    if let Some(m) = overrides.method {
        set(&["method"], toml::Value::String(m.name().into()));
    }
    if let Some(seeds) = &overrides.seeds {
        set(&["seeds"], toml::Value::Array(seeds.iter().map(|&s| toml::Value::Integer(s as i64)).collect()));
    }
    if let Some(v) = overrides.budget {
        set(&["budget"], int(v));
    }
    if let Some(v) = overrides.batch {
        set(&["bo", "batch"], int(v));
    }
    if let Some(v) = overrides.episodes {
        set(&["evaluation", "episodes"], int(v));
    }
    if let Some(v) = overrides.steps {
        set(&["evaluation", "steps"], int(v));
    }
    if let Some(v) = overrides.rollouts {
        set(&["mppi", "rollouts"], int(v));
    }
    if let Some(out) = &overrides.out {
        set(&["out"], toml::Value::String(out.display().to_string()));
    }

    let config: ExperimentConfig = serde_path_to_error::deserialize(toml::Value::Table(merged)).map_err(|e| {
        let path = e.path().to_string();
        HarnessError::config(&path, e.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

fn parse_key<T: FromStr>(table: &toml::Table, key: &str) -> Result<Option<T>, HarnessError>
where
    T::Err: fmt::Display,
{
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => s.parse().map(Some).map_err(|e: T::Err| HarnessError::config(key, e.to_string())),
        Some(other) => Err(HarnessError::config(key, format!("expected a string, found {}", other.type_str()))),
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Parses `name=value` assignments such as `lambda=0.5`.
pub fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let name = name.trim();
    if !POINT_DIMS.contains(&name) {
        return Err(format!("unknown dimension `{name}` (expected one of {})", POINT_DIMS.join(", ")));
    }
    let value: f64 = value.trim().parse().map_err(|e| format!("bad value for `{name}`: {e}"))?;
    Ok((name.to_string(), value))
}

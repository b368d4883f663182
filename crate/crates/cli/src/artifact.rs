//! On-disk run artifacts.
//!
//! A run directory holds `artifact.json` (config snapshot, environment record,
//! seeds, result and fitted surrogate), `trace.jsonl` (one trace row per line),
//! `evaluations.jsonl` (written while the run progresses) and `timing.json`.
//! Only the timing file varies between identical runs.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use adaptmpc_core::env::{DT, GRAVITY, RK4_SUBSTEPS};
use adaptmpc_core::hetbo::{Method, SurrogateFit, TraceRow, TuningTrace};
use adaptmpc_core::task::TaskKind;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, TruthSettings};
use crate::error::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_FILE: &str = "artifact.json";
pub const TRACE_FILE: &str = "trace.jsonl";
pub const EVALUATIONS_FILE: &str = "evaluations.jsonl";
pub const TIMING_FILE: &str = "timing.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentRecord {
    pub task: TaskKind,
    pub truth: TruthSettings,
    pub gravity: f64,
    pub dt: f64,
    pub rk4_substeps: usize,
    pub steps: usize,
}

impl EnvironmentRecord {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self { task: cfg.task, truth: cfg.truth, gravity: GRAVITY, dt: DT, rk4_substeps: RK4_SUBSTEPS, steps: cfg.evaluation.steps }
    }
}

/// Seeds that fully determine a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRecord {
    pub seed: u64,
    /// Stream of the optimizer's generator.
    pub optimizer_stream: u64,
    /// Base of the per-evaluation episode seeds.
    pub evaluation_base: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifact {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub environment: EnvironmentRecord,
    pub seeds: SeedRecord,
    pub trace: TuningTrace,
    pub best_x: Vec<f64>,
    pub best_reward: f64,
    pub surrogate: Option<SurrogateFit>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceHeader {
    method: Method,
    initial: usize,
    rows: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Stored {
    schema_version: u32,
    config: ExperimentConfig,
    environment: EnvironmentRecord,
    seeds: SeedRecord,
    trace: TraceHeader,
    best_x: Vec<f64>,
    best_reward: f64,
    surrogate: Option<SurrogateFit>,
}

#[derive(Serialize, Deserialize)]
struct Timing {
    wall_seconds: f64,
}

impl RunArtifact {
    pub fn save(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let stored = Stored {
            schema_version: self.schema_version,
            config: self.config.clone(),
            environment: self.environment.clone(),
            seeds: self.seeds,
            trace: TraceHeader { method: self.trace.method, initial: self.trace.initial, rows: self.trace.rows.len() },
            best_x: self.best_x.clone(),
            best_reward: self.best_reward,
            surrogate: self.surrogate.clone(),
        };
        let path = dir.join(ARTIFACT_FILE);
        let mut text = serde_json::to_string_pretty(&stored).expect("artifact serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
        write_jsonl(&dir.join(TRACE_FILE), &self.trace.rows)
    }

    pub fn load(dir: &Path) -> Result<Self, HarnessError> {
        let path = dir.join(ARTIFACT_FILE);
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| HarnessError::schema(&path, e.to_string()))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(HarnessError::schema(&path, format!("schema version {v}, expected {SCHEMA_VERSION}"))),
            None => return Err(HarnessError::schema(&path, "missing schema_version")),
        }
        let stored: Stored = serde_path_to_error::deserialize(value)
            .map_err(|e| HarnessError::schema(&path, format!("at `{}`: {}", e.path(), e.inner())))?;
        let rows: Vec<TraceRow> = read_jsonl(&dir.join(TRACE_FILE))?;
        if rows.len() != stored.trace.rows {
            let p = dir.join(TRACE_FILE);
            return Err(HarnessError::schema(&p, format!("{} rows, header says {}", rows.len(), stored.trace.rows)));
        }
        Ok(Self {
            schema_version: stored.schema_version,
            config: stored.config,
            environment: stored.environment,
            seeds: stored.seeds,
            trace: TuningTrace { method: stored.trace.method, initial: stored.trace.initial, rows },
            best_x: stored.best_x,
            best_reward: stored.best_reward,
            surrogate: stored.surrogate,
        })
    }
}

pub fn write_timing(dir: &Path, wall_seconds: f64) -> Result<(), HarnessError> {
    let path = dir.join(TIMING_FILE);
    let text = serde_json::to_string(&Timing { wall_seconds }).expect("timing serializes");
    fs::write(&path, text + "\n").map_err(|e| HarnessError::io(&path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).expect("row serializes");
        w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| HarnessError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| HarnessError::schema(path, format!("line {}: {e}", k + 1)))?);
    }
    Ok(out)
}

/// Append-only log of evaluations as they happen.
pub struct EvaluationLog {
    path: PathBuf,
    writer: BufWriter<File>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub eval: usize,
    pub x: Vec<f64>,
    pub reward: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl EvaluationLog {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), writer: BufWriter::new(file) })
    }

    pub fn append(&mut self, record: &EvaluationRecord) -> Result<(), HarnessError> {
        serde_json::to_writer(&mut self.writer, record).expect("record serializes");
        self.writer.write_all(b"\n").and_then(|_| self.writer.flush()).map_err(|e| HarnessError::io(&self.path, e))
    }
}

/// Per-seed run directories below `out`, sorted by seed.
pub fn run_dirs(out: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(out).map_err(|e| HarnessError::io(out, e))? {
        let entry = entry.map_err(|e| HarnessError::io(out, e))?;
        let name = entry.file_name().to_string_lossy().to_string();
        if let Some(seed) = name.strip_prefix("seed-").and_then(|s| s.parse::<u64>().ok()) {
            if entry.path().join(ARTIFACT_FILE).exists() {
                dirs.push((seed, entry.path()));
            }
        }
    }
    dirs.sort();
    Ok(dirs.into_iter().map(|(_, p)| p).collect())
}

pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}"))
}

//! The work behind each subcommand.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use adaptmpc_core::hetbo::{cma_es, random_search, tune, CurvePoint, Method, SearchSpace, TuningTrace};
use adaptmpc_core::rng::{mix_seed, substream};
use adaptmpc_core::task::POINT_DIMS;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifact::{
    run_dirs, seed_dir, write_timing, EnvironmentRecord, EvaluationLog, EvaluationRecord, RunArtifact, SeedRecord, EVALUATIONS_FILE,
    SCHEMA_VERSION,
};
use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::objective::{rewards, Evaluator, Summary};

const OPTIMIZER_STREAM: u64 = 1;
const EVALUATION_SALT: u64 = 0x6576_616c;

/// Runs one tuning campaign for `seed`. With `dir` set, evaluations are
/// logged there as they happen.
pub fn tune_seed(cfg: &ExperimentConfig, seed: u64, dir: Option<&Path>) -> Result<RunArtifact, HarnessError> {
    cfg.validate()?;
    let space = cfg.search_space();
    let evaluator = Evaluator::from_config(cfg);
    let seeds = SeedRecord { seed, optimizer_stream: OPTIMIZER_STREAM, evaluation_base: mix_seed(seed, EVALUATION_SALT) };
    let mut log = match dir {
        Some(d) => {
            fs::create_dir_all(d).map_err(|e| HarnessError::io(d, e))?;
            Some(EvaluationLog::create(&d.join(EVALUATIONS_FILE))?)
        }
        None => None,
    };
    let mut log_error = None;
    let mut count = 0usize;
    let objective = |x: &[f64]| {
        let out = evaluator.mean_reward(x, mix_seed(seeds.evaluation_base, count as u64));
        if let Some(log) = log.as_mut() {
            let record = EvaluationRecord {
                eval: count,
                x: x.to_vec(),
                reward: out.as_ref().ok().copied(),
                error: out.as_ref().err().map(|e| e.to_string()),
            };
            if let Err(e) = log.append(&record) {
                log_error.get_or_insert(e);
            }
        }
        count += 1;
        out
    };

    let mut rng = substream(seed, seeds.optimizer_stream);
    let batch = cfg.bo.batch;
    let total = batch + cfg.budget;
    let (trace, surrogate) = match cfg.method {
        Method::HeteroBo | Method::HomoBo => {
            let outcome = tune(objective, &space, cfg.budget, cfg.method, &cfg.bo, &mut rng)?;
            (outcome.trace, Some(outcome.fit))
        }
        Method::CmaEs => (cma_es(objective, &space, total, &cfg.cma_es, &mut rng)?.with_initial(batch), None),
        Method::Random => (random_search(objective, &space, total, &mut rng)?.with_initial(batch), None),
    };
    if let Some(e) = log_error {
        return Err(e);
    }
    let best = trace.best().expect("a finished trace has rows");
    Ok(RunArtifact {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        environment: EnvironmentRecord::from_config(cfg),
        seeds,
        best_x: best.x.clone(),
        best_reward: best.reward,
        trace,
        surrogate,
    })
}

/// Runs every configured seed, writes one directory per seed and the
/// aggregate curve CSV, and returns the artifacts in seed order.
pub fn cmd_tune(cfg: &ExperimentConfig) -> Result<Vec<RunArtifact>, HarnessError> {
    cfg.validate()?;
    let out = cfg.out.clone();
    fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;
    let artifacts: Vec<RunArtifact> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let dir = seed_dir(&out, seed);
            let start = Instant::now();
            let artifact = tune_seed(cfg, seed, Some(&dir))?;
            artifact.save(&dir)?;
            write_timing(&dir, start.elapsed().as_secs_f64())?;
            Ok(artifact)
        })
        .collect::<Result<_, HarnessError>>()?;
    let traces: Vec<&TuningTrace> = artifacts.iter().map(|a| &a.trace).collect();
    write_aggregate_csv(&out.join("aggregate.csv"), &aggregate_curves(&traces))?;
    Ok(artifacts)
}

/// Pointwise statistics of per-seed curves at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub iteration: usize,
    pub seeds: usize,
    pub mean_best: f64,
    pub std_best: f64,
    pub mean_observed: f64,
    pub std_observed: f64,
}

/// Mean and sample standard deviation across seeds, truncated to the
/// shortest curve.
pub fn aggregate_curves(traces: &[&TuningTrace]) -> Vec<AggregatePoint> {
    let curves: Vec<Vec<CurvePoint>> = traces.iter().map(|t| t.curve()).collect();
    let len = curves.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let best: Vec<f64> = curves.iter().map(|c| c[i].best_so_far).collect();
            let observed: Vec<f64> = curves.iter().map(|c| c[i].observed).collect();
            let (b, o) = (Summary::of(&best), Summary::of(&observed));
            AggregatePoint {
                iteration: curves[0][i].iteration,
                seeds: curves.len(),
                mean_best: b.mean,
                std_best: b.std,
                mean_observed: o.mean,
                std_observed: o.std,
            }
        })
        .collect()
}

pub fn write_aggregate_csv(path: &Path, points: &[AggregatePoint]) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "iteration",
        "seeds",
        "mean_best",
        "lower_best",
        "upper_best",
        "mean_observed",
        "lower_observed",
        "upper_observed",
    ])
    .map_err(|e| csv_error(path, e))?;
    for p in points {
        w.write_record([
            p.iteration.to_string(),
            p.seeds.to_string(),
            p.mean_best.to_string(),
            (p.mean_best - 2.0 * p.std_best).to_string(),
            (p.mean_best + 2.0 * p.std_best).to_string(),
            p.mean_observed.to_string(),
            (p.mean_observed - 2.0 * p.std_observed).to_string(),
            (p.mean_observed + 2.0 * p.std_observed).to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::io(path, std::io::Error::other(e))
}

/// Fills the configured reference point with `assignments`, checking bounds.
pub fn build_point(cfg: &ExperimentConfig, assignments: &[(String, f64)]) -> Result<Vec<f64>, HarnessError> {
    let space = cfg.search_space();
    let mut x = cfg.reference.to_point();
    for (name, value) in assignments {
        let k = space.index_of(name).ok_or_else(|| HarnessError::config(name, "not a search dimension"))?;
        x[k] = *value;
    }
    for (k, d) in space.dims.iter().enumerate() {
        if !(d.lower..=d.upper).contains(&x[k]) {
            return Err(HarnessError::config(&d.name, format!("{} is outside [{}, {}]", x[k], d.lower, d.upper)));
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x_axis: String,
    pub y_axis: String,
    pub resolution: usize,
    /// Values for the remaining dimensions.
    pub fixed: Vec<(String, f64)>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub x: f64,
    pub y: f64,
    pub mean_reward: f64,
    pub std_reward: f64,
}

/// Evenly spaced values from `lower` to `upper` inclusive.
pub fn axis_values(lower: f64, upper: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lower + upper)];
    }
    (0..n).map(|k| if k + 1 == n { upper } else { lower + (upper - lower) * k as f64 / (n - 1) as f64 }).collect()
}

/// Evaluates the mean reward over a `resolution × resolution` grid of two
/// search dimensions. Every cell uses the same episode seeds.
pub fn cmd_grid(cfg: &ExperimentConfig, spec: &GridSpec) -> Result<Vec<GridCell>, HarnessError> {
    cfg.validate()?;
    let space: SearchSpace = cfg.search_space();
    let ix = space.index_of(&spec.x_axis).ok_or_else(|| HarnessError::config("grid.x", format!("`{}` is not a search dimension", spec.x_axis)))?;
    let iy = space.index_of(&spec.y_axis).ok_or_else(|| HarnessError::config("grid.y", format!("`{}` is not a search dimension", spec.y_axis)))?;
    if ix == iy {
        return Err(HarnessError::config("grid.y", "the two axes must differ"));
    }
    if spec.resolution == 0 {
        return Err(HarnessError::config("grid.resolution", "must be at least 1"));
    }
    let base = build_point(cfg, &spec.fixed)?;
    let xs = axis_values(space.dims[ix].lower, space.dims[ix].upper, spec.resolution);
    let ys = axis_values(space.dims[iy].lower, space.dims[iy].upper, spec.resolution);
    let evaluator = Evaluator::from_config(cfg);
    let seeds = evaluator.episode_seeds(spec.seed);
    let mut cells = Vec::with_capacity(xs.len() * ys.len());
    for &xv in &xs {
        for &yv in &ys {
            let mut p = base.clone();
            p[ix] = xv;
            p[iy] = yv;
            let s = Summary::of(&rewards(&evaluator.run(&p, &seeds)?));
            cells.push(GridCell { x: xv, y: yv, mean_reward: s.mean, std_reward: s.std });
        }
    }
    Ok(cells)
}

pub fn write_grid_csv(path: &Path, spec: &GridSpec, cells: &[GridCell]) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record([spec.x_axis.as_str(), spec.y_axis.as_str(), "mean_reward", "std_reward"]).map_err(|e| csv_error(path, e))?;
    for c in cells {
        w.write_record([c.x.to_string(), c.y.to_string(), c.mean_reward.to_string(), c.std_reward.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode: usize,
    pub seed: u64,
    pub cumulative_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub point: Vec<(String, f64)>,
    pub summary: Summary,
    pub episodes: Vec<EpisodeRow>,
}

/// Runs `cfg.evaluation.episodes` episodes at `x`.
pub fn cmd_eval(cfg: &ExperimentConfig, x: &[f64], seed: u64) -> Result<EvalReport, HarnessError> {
    cfg.validate()?;
    let evaluator = Evaluator::from_config(cfg);
    let seeds = evaluator.episode_seeds(seed);
    let results = evaluator.run(x, &seeds)?;
    let episodes = results
        .iter()
        .enumerate()
        .map(|(k, r)| EpisodeRow { episode: k, seed: r.seed, cumulative_reward: r.cumulative_reward })
        .collect();
    Ok(EvalReport {
        task: cfg.task.name().to_string(),
        point: POINT_DIMS.iter().map(|n| n.to_string()).zip(x.iter().copied()).collect(),
        summary: Summary::of(&rewards(&results)),
        episodes,
    })
}

pub fn write_eval(dir: &Path, report: &EvalReport) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    let path = dir.join("episodes.csv");
    let mut w = csv_writer(&path)?;
    for row in &report.episodes {
        w.serialize(row).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportSpec {
    pub run: PathBuf,
    pub out: Option<PathBuf>,
    /// Dimension varied by the fitted-model slice; the others sit at the
    /// run's best point.
    pub slice_dim: String,
    pub slice_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceRow {
    pub value: f64,
    pub g_hat: f64,
    pub lower: f64,
    pub upper: f64,
    pub sigma_nu: f64,
    pub zeta: f64,
}

/// Fitted trend and noise (in reward units) along one dimension through
/// the artifact's best point. `None` unless the run fitted a trend.
pub fn noise_slice(artifact: &RunArtifact, dim: &str, points: usize) -> Result<Option<Vec<SliceRow>>, HarnessError> {
    let Some(fit) = &artifact.surrogate else { return Ok(None) };
    let Some(trend) = &fit.trend else { return Ok(None) };
    let space = artifact.config.search_space();
    let k = space.index_of(dim).ok_or_else(|| HarnessError::config("slice", format!("`{dim}` is not a search dimension")))?;
    let d = &space.dims[k];
    let rows = axis_values(d.lower, d.upper, points.max(1))
        .into_iter()
        .map(|v| {
            let mut x = artifact.best_x.clone();
            x[k] = v;
            let u = space.to_unit(&x);
            let g_hat = fit.y_mean + fit.y_std * trend.predict(&u);
            let sigma_nu = fit.y_std * fit.noise.sigma(&u);
            SliceRow {
                value: v,
                g_hat,
                lower: g_hat - 2.0 * sigma_nu,
                upper: g_hat + 2.0 * sigma_nu,
                sigma_nu,
                zeta: fit.y_std * fit.noise.zeta,
            }
        })
        .collect();
    Ok(Some(rows))
}

/// Writes `curves.csv` (aggregate), `curve_seed_<s>.csv` per seed and, for
/// runs with a fitted trend, `slice_seed_<s>.csv`. Returns the files written.
pub fn cmd_export_plots(spec: &ExportSpec) -> Result<Vec<PathBuf>, HarnessError> {
    let dirs = run_dirs(&spec.run)?;
    if dirs.is_empty() {
        return Err(HarnessError::schema(&spec.run, "no seed-<n> run directories with an artifact"));
    }
    let artifacts: Vec<RunArtifact> = dirs.iter().map(|d| RunArtifact::load(d)).collect::<Result<_, _>>()?;
    let out = spec.out.clone().unwrap_or_else(|| spec.run.join("plots"));
    let mut written = Vec::new();

    let traces: Vec<&TuningTrace> = artifacts.iter().map(|a| &a.trace).collect();
    let path = out.join("curves.csv");
    write_aggregate_csv(&path, &aggregate_curves(&traces))?;
    written.push(path);

    for a in &artifacts {
        let path = out.join(format!("curve_seed_{}.csv", a.seeds.seed));
        let mut w = csv_writer(&path)?;
        for p in a.trace.curve() {
            w.serialize(p).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);

        if let Some(rows) = noise_slice(a, &spec.slice_dim, spec.slice_points)? {
            let path = out.join(format!("slice_seed_{}.csv", a.seeds.seed));
            let mut w = csv_writer(&path)?;
            for r in rows {
                w.serialize(r).map_err(|e| csv_error(&path, e))?;
            }
            w.flush().map_err(|e| HarnessError::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

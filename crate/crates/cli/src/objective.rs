//! Episode evaluation of search points.

use adaptmpc_core::env::{EpisodeResult, PhysicalParams};
use adaptmpc_core::rng::mix_seed;
use adaptmpc_core::task::{run_task_episode, ControllerSetup, TaskKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// Runs MPPI episodes on the true system for a given search point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluator {
    pub task: TaskKind,
    pub horizon: usize,
    pub rollouts: usize,
    pub episodes: usize,
    pub steps: usize,
    pub truth: PhysicalParams,
}

impl Evaluator {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            task: cfg.task,
            horizon: cfg.mppi.horizon,
            rollouts: cfg.mppi.rollouts,
            episodes: cfg.evaluation.episodes,
            steps: cfg.evaluation.steps,
            truth: cfg.truth.params(),
        }
    }

    /// Episode seeds derived from `seed`, one per episode.
    pub fn episode_seeds(&self, seed: u64) -> Vec<u64> {
        (0..self.episodes as u64).map(|k| mix_seed(seed, k)).collect()
    }

    /// One episode per seed, run in parallel; results come back in seed order.
    pub fn run(&self, x: &[f64], seeds: &[u64]) -> adaptmpc_core::Result<Vec<EpisodeResult>> {
        let setup = ControllerSetup::from_point(x, self.horizon, self.rollouts)?;
        seeds.par_iter().map(|&s| run_task_episode(self.task, &setup, &self.truth, self.steps, s)).collect()
    }

    /// Mean cumulative reward over `episodes` episodes.
    pub fn mean_reward(&self, x: &[f64], seed: u64) -> adaptmpc_core::Result<f64> {
        let results = self.run(x, &self.episode_seeds(seed))?;
        Ok(Summary::of(&rewards(&results)).mean)
    }
}

pub fn rewards(results: &[EpisodeResult]) -> Vec<f64> {
    results.iter().map(|r| r.cumulative_reward).collect()
}

/// Sample statistics of cumulative rewards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single episode.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub single_sample: bool,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
        Self {
            n,
            mean,
            std,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            single_sample: n == 1,
        }
    }
}

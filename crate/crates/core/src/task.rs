//! Task catalogue and the mapping from a search point to a controller.
//!
//! A search point is `[μ_m, σ_m, μ_l, σ_l, λ, σ_ε]`: the gamma distributions of
//! the internal model's mass and length followed by the MPPI temperature and
//! perturbation scale. Horizon and rollout count are fixed per experiment.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};

use crate::distparams::GammaSpec;
use crate::env::{run_episode, Cartpole, EpisodeResult, Pendulum, PhysicalParams};
use crate::hetbo::space::{Dim, SearchSpace};
use crate::mppi::{ModelDistribution, Mppi, MppiConfig};
use crate::{Error, Result};

/// Names of the search coordinates, in order.
pub const POINT_DIMS: [&str; 6] = ["mu_mass", "sigma_mass", "mu_length", "sigma_length", "lambda", "sigma_eps"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Pendulum,
    Cartpole,
}

impl TaskKind {
    pub const ALL: [TaskKind; 2] = [TaskKind::Pendulum, TaskKind::Cartpole];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Pendulum => "pendulum",
            TaskKind::Cartpole => "cartpole",
        }
    }

    /// Reference settings for this task.
    pub fn defaults(self) -> TaskDefaults {
        match self {
            TaskKind::Pendulum => TaskDefaults {
                episodes: 15,
                horizon: 20,
                rollouts: 400,
                mu_mass: (0.2, 2.0),
                mu_length: (0.2, 2.0),
                sigma: (1e-5, 0.1),
                lambda: (1e-5, 2.5),
                sigma_eps: (1e-5, 4.0),
                steps: 200,
            },
            TaskKind::Cartpole => TaskDefaults {
                episodes: 40,
                horizon: 10,
                rollouts: 250,
                mu_mass: (0.1, 1.5),
                mu_length: (0.2, 1.5),
                sigma: (1e-5, 0.1),
                lambda: (1e-5, 2.5),
                sigma_eps: (1e-5, 4.0),
                steps: 200,
            },
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pendulum" => Ok(TaskKind::Pendulum),
            "cartpole" => Ok(TaskKind::Cartpole),
            other => Err(Error::InvalidConfig(alloc::format!("unknown task `{other}`"))),
        }
    }
}

/// Per-task experiment constants: episode count, MPPI horizon and rollouts,
/// and the search ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskDefaults {
    pub episodes: usize,
    pub horizon: usize,
    pub rollouts: usize,
    pub mu_mass: (f64, f64),
    pub mu_length: (f64, f64),
    pub sigma: (f64, f64),
    pub lambda: (f64, f64),
    pub sigma_eps: (f64, f64),
    pub steps: usize,
}

impl TaskDefaults {
    pub fn search_space(&self) -> SearchSpace {
        SearchSpace::new(Vec::from([
            Dim::free(POINT_DIMS[0], self.mu_mass.0, self.mu_mass.1),
            Dim::scale(POINT_DIMS[1], self.sigma.0, self.sigma.1),
            Dim::free(POINT_DIMS[2], self.mu_length.0, self.mu_length.1),
            Dim::scale(POINT_DIMS[3], self.sigma.0, self.sigma.1),
            Dim::scale(POINT_DIMS[4], self.lambda.0, self.lambda.1),
            Dim::scale(POINT_DIMS[5], self.sigma_eps.0, self.sigma_eps.1),
        ]))
        .expect("task defaults are valid")
    }
}

/// Controller built from a search point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerSetup {
    pub model: ModelDistribution,
    pub mppi: MppiConfig,
}

impl ControllerSetup {
    /// Decodes `[μ_m, σ_m, μ_l, σ_l, λ, σ_ε]`.
    pub fn from_point(x: &[f64], horizon: usize, rollouts: usize) -> Result<Self> {
        if x.len() != POINT_DIMS.len() {
            return Err(Error::Dimension { expected: POINT_DIMS.len(), got: x.len() });
        }
        let model = ModelDistribution::new(GammaSpec::new("mass", x[0], x[1])?, GammaSpec::new("length", x[2], x[3])?)?;
        let mppi = MppiConfig { lambda: x[4], sigma_eps: x[5], horizon, rollouts };
        mppi.validate()?;
        Ok(Self { model, mppi })
    }

    pub fn to_point(&self) -> Vec<f64> {
        Vec::from([
            self.model.mass.mu,
            self.model.mass.sigma,
            self.model.length.mu,
            self.model.length.sigma,
            self.mppi.lambda,
            self.mppi.sigma_eps,
        ])
    }
}

/// Runs one episode of `task` with a fresh MPPI controller on the true
/// dynamics `true_params`.
pub fn run_task_episode(
    task: TaskKind,
    setup: &ControllerSetup,
    true_params: &PhysicalParams,
    steps: usize,
    seed: u64,
) -> Result<EpisodeResult> {
    match task {
        TaskKind::Pendulum => {
            let dynamics = Pendulum::default();
            let mut ctl = Mppi::new(dynamics, setup.mppi, setup.model.clone())?;
            run_episode(&dynamics, &mut ctl, true_params, steps, seed)
        }
        TaskKind::Cartpole => {
            let dynamics = Cartpole::default();
            let mut ctl = Mppi::new(dynamics, setup.mppi, setup.model.clone())?;
            run_episode(&dynamics, &mut ctl, true_params, steps, seed)
        }
    }
}

/// Parses `name=value` pairs into a full point, filling gaps from `defaults`.
pub fn point_from_assignments(assignments: &[(String, f64)], defaults: &[f64]) -> Result<Vec<f64>> {
    let mut x = defaults.to_vec();
    for (name, value) in assignments {
        let idx = POINT_DIMS
            .iter()
            .position(|d| d == name)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown dimension `{name}`")))?;
        x[idx] = *value;
    }
    Ok(x)
}

//! The Bayesian optimisation loop.
//!
//! An initial Latin-hypercube batch is evaluated, the surrogate's kernel and
//! noise hyper-parameters are fitted on it once, and then each iteration
//! maximizes the UCB, evaluates the objective there and re-conditions the GP
//! with the hyper-parameters held fixed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::acquisition::maximize_acquisition;
use super::noise::{fit_noise_model, fit_reward_trend, scale_bounds, NoiseModel, RewardTrendModel};
use super::space::{latin_hypercube, SearchSpace};
use super::trace::{Method, Recorder, TuningTrace};
use crate::gp::{fit_kernel, ConditionedGp, FitOptions, KernelParams, NoiseScaling, ObservationSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoConfig {
    /// Size of the initial Latin-hypercube design.
    pub batch: usize,
    /// UCB exploration weight δ.
    pub delta: f64,
    /// Polynomial degree of the trend and noise feature maps.
    pub degree: usize,
    pub kernel_restarts: usize,
    pub kernel_max_iter: usize,
    pub acq_restarts: usize,
    pub acq_max_iter: usize,
    /// Refit hyper-parameters every this many iterations; 0 never refits.
    pub refit_every: usize,
    /// Starting noise std (standardized units) of the homoscedastic model.
    pub homo_noise_init: f64,
    /// Replaces the fitted heteroscedastic noise model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced_noise: Option<NoiseModel>,
}

impl Default for BoConfig {
    fn default() -> Self {
        Self {
            batch: 150,
            delta: 2.0,
            degree: super::noise::DEFAULT_DEGREE,
            kernel_restarts: 10,
            kernel_max_iter: 200,
            acq_restarts: 20,
            acq_max_iter: 50,
            refit_every: 0,
            homo_noise_init: 0.1,
            forced_noise: None,
        }
    }
}

/// Fitted surrogate hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateFit {
    pub kernel: KernelParams,
    pub noise: NoiseModel,
    pub trend: Option<RewardTrendModel>,
    /// Target standardization `(mean, std)` in force for this fit.
    pub y_mean: f64,
    pub y_std: f64,
    pub log_likelihood: Option<f64>,
    pub degraded: bool,
}

#[derive(Debug, Clone)]
pub struct BoOutcome {
    pub trace: TuningTrace,
    pub fit: SurrogateFit,
    pub data: ObservationSet,
}

/// Fits kernel and noise hyper-parameters on `data` (standardized already).
///
/// Both variants go through the same path; they differ only in the noise
/// model whose scale is optimized together with the kernel.
pub fn fit_surrogate<R: Rng + ?Sized>(
    data: &ObservationSet,
    method: Method,
    cfg: &BoConfig,
    rng: &mut R,
) -> Result<SurrogateFit> {
    let (trend, noise) = match (method, &cfg.forced_noise) {
        (Method::HeteroBo, Some(forced)) => (None, forced.clone()),
        (Method::HeteroBo, None) => {
            let trend = fit_reward_trend(data, cfg.degree)?;
            let noise = fit_noise_model(data, &trend, cfg.degree)?;
            (Some(trend), noise)
        }
        (Method::HomoBo, _) => (None, NoiseModel::constant(cfg.homo_noise_init)),
        (other, _) => return Err(Error::InvalidConfig(alloc::format!("{other} is not a Bayesian optimisation method"))),
    };
    let (initial, bounds) = scale_bounds(&noise);
    let diag = |s: f64| noise.with_scale(s).variances(data);
    let scaling = NoiseScaling { initial, bounds, diag: &diag };
    let opts = FitOptions { restarts: cfg.kernel_restarts, max_iter: cfg.kernel_max_iter };
    let fit = fit_kernel(data, &scaling, &opts, rng)?;
    let (y_mean, y_std) = data.stats();
    Ok(SurrogateFit {
        kernel: fit.params,
        noise: noise.with_scale(fit.noise_scale),
        trend,
        y_mean,
        y_std,
        log_likelihood: fit.log_likelihood,
        degraded: fit.degraded,
    })
}

/// Maximizes `objective` over `space` with heteroscedastic or homoscedastic
/// Bayesian optimisation: `cfg.batch` initial evaluations, then `budget`
/// acquisition-driven ones.
pub fn tune<F, E, R>(
    mut objective: F,
    space: &SearchSpace,
    budget: usize,
    method: Method,
    cfg: &BoConfig,
    rng: &mut R,
) -> Result<BoOutcome>
where
    F: FnMut(&[f64]) -> core::result::Result<f64, E>,
    R: Rng + ?Sized,
{
    space.validate()?;
    if !matches!(method, Method::HeteroBo | Method::HomoBo) {
        return Err(Error::InvalidConfig(alloc::format!("{method} is not a Bayesian optimisation method")));
    }
    if cfg.batch == 0 {
        return Err(Error::InvalidConfig("initial batch must contain at least one point".into()));
    }
    let d = space.dim();
    let mut recorder = Recorder::new(method);
    let design = latin_hypercube(cfg.batch, d, rng);
    for u in &design {
        let x = space.from_unit(u);
        let out = objective(&x);
        recorder.record(x, out);
    }
    if recorder.rows().iter().all(|r| r.failed) {
        return Err(Error::AllEvaluationsFailed);
    }
    let mut data = ObservationSet::new(d);
    for (u, row) in design.into_iter().zip(recorder.rows()) {
        data.push(u, row.reward)?;
    }
    data.standardize();
    let mut fit = fit_surrogate(&data, method, cfg, rng)?;

    for iteration in 1..=budget {
        if cfg.refit_every > 0 && iteration > 1 && (iteration - 1) % cfg.refit_every == 0 {
            data.standardize();
            fit = fit_surrogate(&data, method, cfg, rng)?;
        }
        let gp = ConditionedGp::new(&fit.kernel, &fit.noise.variances(&data), &data)?;
        let u = maximize_acquisition(&gp, &data, cfg.delta, cfg.acq_restarts, cfg.acq_max_iter, rng);
        let x = space.from_unit(&u);
        let out = objective(&x);
        let reward = recorder.record(x, out).ok_or(Error::AllEvaluationsFailed)?;
        data.push(u, reward)?;
    }

    let trace = recorder.finish(cfg.batch)?;
    Ok(BoOutcome { trace, fit, data })
}

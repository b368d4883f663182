//! Model predictive path integral control with a randomized internal model.
//!
//! Each control step samples `M` Gaussian perturbations of the rolling
//! optimal-action sequence, rolls every perturbed sequence through the
//! internal dynamics with freshly sampled physical parameters, and averages
//! the perturbations with exponentiated-cost weights.

use alloc::vec;
use alloc::vec::Vec;
use rand::RngCore;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distparams::GammaSpec;
use crate::env::{Controller, Dynamics, PhysicalParams, StateVector, DT};
use crate::linalg::Matrix;
use crate::math;
use crate::rng::{fill_standard_normal, substream, StreamRng};
use crate::{Error, Result};

/// Controller hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MppiConfig {
    /// Temperature λ.
    pub lambda: f64,
    /// Standard deviation σ_ε of the action perturbations.
    pub sigma_eps: f64,
    /// Horizon T.
    pub horizon: usize,
    /// Rollouts M.
    pub rollouts: usize,
}

impl MppiConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda > 0.0
            && self.sigma_eps > 0.0
            && self.lambda.is_finite()
            && self.sigma_eps.is_finite()
            && self.horizon >= 1
            && self.rollouts >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(alloc::format!("invalid MPPI config {self:?}")))
        }
    }
}

/// Rolling sequence of optimal actions, `horizon` long.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionPlan {
    pub actions: Vec<f64>,
}

impl ActionPlan {
    pub fn zeros(horizon: usize) -> Self {
        Self { actions: vec![0.0; horizon] }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Drops the first action and appends a zero.
    pub fn shifted(&self) -> Self {
        let mut actions = self.actions[1..].to_vec();
        actions.push(0.0);
        Self { actions }
    }
}

/// Distribution of the controller's internal physical parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDistribution {
    pub mass: GammaSpec,
    pub length: GammaSpec,
}

impl ModelDistribution {
    pub fn new(mass: GammaSpec, length: GammaSpec) -> Result<Self> {
        mass.validate()?;
        length.validate()?;
        Ok(Self { mass, length })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PhysicalParams> {
        let mass = self.mass.sample(rng)?;
        let length = self.length.sample(rng)?;
        Ok(PhysicalParams { mass, length })
    }
}

/// Perturbations, costs and weights of one planning step.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBatch {
    /// `M × T` perturbations ε.
    pub perturbations: Matrix,
    /// Trajectory costs; `+∞` marks a diverged rollout.
    pub costs: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `q(s_T) + Σ_{i<T} c(s_i)` with the terminal cost equal to the instant cost.
///
/// `cost(i, s)` gives the instant cost of the `i`-th state of the trajectory.
pub fn trajectory_cost<S: StateVector>(states: &[S], mut cost: impl FnMut(usize, &S) -> f64) -> Result<f64> {
    let Some((last, running)) = states.split_last() else {
        return Err(Error::Dimension { expected: 1, got: 0 });
    };
    if states.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut total = 0.0;
    for (i, s) in running.iter().enumerate() {
        total += cost(i, s);
    }
    Ok(total + cost(running.len(), last))
}

/// Information-theoretic rollout weights.
///
/// For rollout `j` the exponent is `−(1/λ)·(C_j + (λ/σ_ε²)·Σ_i a_i*·v_i^j)` with
/// `v_i^j = a_i* + ε_i^j`; weights are the max-shifted softmax of the exponents.
pub fn compute_weights(costs: &[f64], perturbations: &Matrix, plan: &ActionPlan, config: &MppiConfig) -> Result<Vec<f64>> {
    if perturbations.rows() != costs.len() {
        return Err(Error::Dimension { expected: costs.len(), got: perturbations.rows() });
    }
    if perturbations.cols() != plan.len() {
        return Err(Error::Dimension { expected: plan.len(), got: perturbations.cols() });
    }
    let inv_var = 1.0 / (config.sigma_eps * config.sigma_eps);
    let exponents: Vec<f64> = costs
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            if !c.is_finite() {
                return f64::NEG_INFINITY;
            }
            let control: f64 =
                plan.actions.iter().zip(perturbations.row(j)).map(|(a, eps)| a * (a + eps)).sum();
            -c / config.lambda - inv_var * control
        })
        .collect();
    let max = exponents.iter().copied().filter(|e| e.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NoValidRollout);
    }
    let mut weights: Vec<f64> = exponents.iter().map(|&e| if e.is_finite() { math::exp(e - max) } else { 0.0 }).collect();
    let eta: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= eta);
    Ok(weights)
}

/// `a_i* + Σ_j w_j·ε_i^j`.
pub fn update_plan(plan: &ActionPlan, perturbations: &Matrix, weights: &[f64]) -> ActionPlan {
    let mut actions = plan.actions.clone();
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (a, eps) in actions.iter_mut().zip(perturbations.row(j)) {
            *a += w * eps;
        }
    }
    ActionPlan { actions }
}

/// Result of one [`Mppi::plan_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    /// First updated action, clipped to the actuator bound.
    pub action: f64,
    /// Updated plan before the receding-horizon shift.
    pub updated: ActionPlan,
    /// Plan to use at the next control step.
    pub next_plan: ActionPlan,
    pub batch: RolloutBatch,
}

/// MPPI controller over dynamics `D`.
#[derive(Debug, Clone)]
pub struct Mppi<D> {
    pub dynamics: D,
    pub config: MppiConfig,
    pub model: ModelDistribution,
    plan: ActionPlan,
}

impl<D: Dynamics> Mppi<D> {
    pub fn new(dynamics: D, config: MppiConfig, model: ModelDistribution) -> Result<Self> {
        config.validate()?;
        Ok(Self { dynamics, plan: ActionPlan::zeros(config.horizon), config, model })
    }

    pub fn plan(&self) -> &ActionPlan {
        &self.plan
    }

    /// One planning step from `state` against the randomized internal model.
    ///
    /// A single draw from `rng` keys the step; rollout `j` uses stream `j` of
    /// that key, so results do not depend on evaluation order.
    pub fn plan_step(&self, plan: &ActionPlan, state: &D::State, rng: &mut StreamRng) -> Result<PlanOutcome> {
        let (t_len, m) = (self.config.horizon, self.config.rollouts);
        if plan.len() != t_len {
            return Err(Error::Dimension { expected: t_len, got: plan.len() });
        }
        let key = rng.next_u64();
        let mut perturbations = Matrix::zeros(m, t_len);
        let mut costs = Vec::with_capacity(m);
        let mut states = Vec::with_capacity(t_len);
        let mut actions = Vec::with_capacity(t_len);
        for j in 0..m {
            let mut r = substream(key, j as u64);
            let row = perturbations.row_mut(j);
            fill_standard_normal(&mut r, row);
            for e in row.iter_mut() {
                *e *= self.config.sigma_eps;
            }
            let params = self.model.sample(&mut r)?;
            costs.push(self.rollout(plan, perturbations.row(j), state, &params, &mut states, &mut actions));
        }
        let weights = compute_weights(&costs, &perturbations, plan, &self.config)?;
        let updated = update_plan(plan, &perturbations, &weights);
        let action = self.dynamics.clip(updated.actions[0]);
        let next_plan = updated.shifted();
        Ok(PlanOutcome { action, updated, next_plan, batch: RolloutBatch { perturbations, costs, weights } })
    }

    fn rollout(
        &self,
        plan: &ActionPlan,
        eps: &[f64],
        start: &D::State,
        params: &PhysicalParams,
        states: &mut Vec<D::State>,
        actions: &mut Vec<f64>,
    ) -> f64 {
        states.clear();
        actions.clear();
        let mut s = *start;
        for (a_opt, e) in plan.actions.iter().zip(eps) {
            let a = self.dynamics.clip(a_opt + e);
            match self.dynamics.step(&s, a, params, DT) {
                Ok(next) => s = next,
                Err(_) => return f64::INFINITY,
            }
            states.push(s);
            actions.push(a);
        }
        trajectory_cost(states, |i, s| -self.dynamics.reward(s, actions[i])).unwrap_or(f64::INFINITY)
    }
}

impl<D: Dynamics> Controller<D::State> for Mppi<D> {
    fn reset(&mut self) {
        self.plan = ActionPlan::zeros(self.config.horizon);
    }

    fn act(&mut self, state: &D::State, rng: &mut StreamRng) -> Result<f64> {
        let out = self.plan_step(&self.plan, state, rng)?;
        self.plan = out.next_plan;
        Ok(out.action)
    }
}

//! Deterministic dynamics, dense rewards and episode execution for the
//! pendulum swing-up and cartpole balancing tasks.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt::Debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::math;
use crate::rng::{substream, StreamRng};
use crate::{Error, Result};

/// Control period shared by both tasks [s].
pub const DT: f64 = 0.05;
/// RK4 sub-steps per control period.
pub const RK4_SUBSTEPS: usize = 4;
pub const GRAVITY: f64 = 9.81;

/// Wraps an angle to (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut w = theta - two_pi * math::floor((theta + PI) / two_pi);
    if w <= -PI {
        w += two_pi;
    }
    w
}

/// Fixed-size state vector.
pub trait StateVector: Copy + Debug + PartialEq + Send + Sync {
    fn as_slice(&self) -> &[f64];
    fn from_fn(f: impl FnMut(usize) -> f64) -> Self;

    fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }
}

impl<const N: usize> StateVector for [f64; N] {
    fn as_slice(&self) -> &[f64] {
        self
    }

    fn from_fn(f: impl FnMut(usize) -> f64) -> Self {
        core::array::from_fn(f)
    }
}

/// Randomizable physical parameters. For the pendulum these are the bob mass
/// and rod length; for the cartpole the pole mass and pole half-length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mass: f64,
    pub length: f64,
}

impl PhysicalParams {
    pub const NOMINAL: Self = Self { mass: 1.0, length: 1.0 };

    pub fn new(mass: f64, length: f64) -> Result<Self> {
        let p = Self { mass, length };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mass > 0.0 && self.length > 0.0 && self.mass.is_finite() && self.length.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams(alloc::format!("mass={} length={}", self.mass, self.length)))
        }
    }
}

/// A control task: equations of motion, reward and actuator limits.
pub trait Dynamics: Sync {
    type State: StateVector;

    /// Time derivative of the state under action `a` (already clipped).
    fn derivative(&self, s: &Self::State, a: f64, p: &PhysicalParams) -> Self::State;

    fn reward(&self, s: &Self::State, a: f64) -> f64;

    /// Symmetric actuator bound; actions are clipped to `[-bound, bound]`.
    fn action_bound(&self) -> f64;

    fn initial_state(&self, rng: &mut StreamRng) -> Self::State;

    /// Canonicalizes an integrated state (angle wrapping).
    fn observe(&self, s: Self::State) -> Self::State {
        s
    }

    fn clip(&self, a: f64) -> f64 {
        let b = self.action_bound();
        a.clamp(-b, b)
    }

    /// Advances one control period of length `dt` with RK4.
    fn step(&self, s: &Self::State, a: f64, p: &PhysicalParams, dt: f64) -> Result<Self::State> {
        if !s.is_finite() || !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let a = self.clip(a);
        let h = dt / RK4_SUBSTEPS as f64;
        let mut x = *s;
        for _ in 0..RK4_SUBSTEPS {
            x = rk4(|y| self.derivative(y, a, p), &x, h);
        }
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(self.observe(x))
    }
}

fn rk4<S: StateVector>(f: impl Fn(&S) -> S, s: &S, h: f64) -> S {
    let x = s.as_slice();
    let k1 = f(s);
    let s2 = S::from_fn(|i| x[i] + 0.5 * h * k1.as_slice()[i]);
    let k2 = f(&s2);
    let s3 = S::from_fn(|i| x[i] + 0.5 * h * k2.as_slice()[i]);
    let k3 = f(&s3);
    let s4 = S::from_fn(|i| x[i] + h * k3.as_slice()[i]);
    let k4 = f(&s4);
    S::from_fn(|i| {
        x[i] + h / 6.0 * (k1.as_slice()[i] + 2.0 * k2.as_slice()[i] + 2.0 * k3.as_slice()[i] + k4.as_slice()[i])
    })
}

/// Frictionless point-mass pendulum. State `[θ, ω]` with θ measured from the
/// upright position, so θ = π hangs down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pendulum {
    pub gravity: f64,
    pub max_torque: f64,
}

impl Default for Pendulum {
    fn default() -> Self {
        Self { gravity: GRAVITY, max_torque: 2.0 }
    }
}

impl Pendulum {
    /// Mechanical energy with the potential zero at the pivot height.
    pub fn energy(&self, s: &[f64; 2], p: &PhysicalParams) -> f64 {
        let (m, l) = (p.mass, p.length);
        0.5 * m * l * l * s[1] * s[1] + m * self.gravity * l * math::cos(s[0])
    }
}

impl Dynamics for Pendulum {
    type State = [f64; 2];

    fn derivative(&self, s: &[f64; 2], a: f64, p: &PhysicalParams) -> [f64; 2] {
        let (m, l) = (p.mass, p.length);
        [s[1], self.gravity / l * math::sin(s[0]) + a / (m * l * l)]
    }

    fn reward(&self, s: &[f64; 2], a: f64) -> f64 {
        let th = wrap_angle(s[0]);
        -(th * th + 0.1 * s[1] * s[1] + 0.001 * a * a)
    }

    fn action_bound(&self) -> f64 {
        self.max_torque
    }

    fn initial_state(&self, _rng: &mut StreamRng) -> [f64; 2] {
        [PI, 0.0]
    }

    fn observe(&self, s: [f64; 2]) -> [f64; 2] {
        [wrap_angle(s[0]), s[1]]
    }
}

/// Cart with a hinged pole driven by a continuous horizontal force.
/// State `[x, ẋ, θ, θ̇]`, θ = 0 upright.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cartpole {
    pub gravity: f64,
    pub cart_mass: f64,
    pub max_force: f64,
    pub track_bound: f64,
}

impl Default for Cartpole {
    fn default() -> Self {
        Self { gravity: GRAVITY, cart_mass: 1.0, max_force: 10.0, track_bound: 2.4 }
    }
}

/// Charged once per step when the cart leaves the track.
pub const OFF_TRACK_PENALTY: f64 = 100.0;

impl Dynamics for Cartpole {
    type State = [f64; 4];

    fn derivative(&self, s: &[f64; 4], a: f64, p: &PhysicalParams) -> [f64; 4] {
        let (m, l) = (p.mass, p.length);
        let total = self.cart_mass + m;
        let (sin, cos) = math::sin_cos(s[2]);
        let temp = (a + m * l * s[3] * s[3] * sin) / total;
        let theta_acc = (self.gravity * sin - cos * temp) / (l * (4.0 / 3.0 - m * cos * cos / total));
        let x_acc = temp - m * l * theta_acc * cos / total;
        [s[1], x_acc, s[3], theta_acc]
    }

    fn reward(&self, s: &[f64; 4], a: f64) -> f64 {
        let th = wrap_angle(s[2]);
        let mut r = -(s[0] * s[0] + th * th + 0.01 * s[1] * s[1] + 0.01 * s[3] * s[3] + 0.001 * a * a);
        if s[0].abs() > self.track_bound {
            r -= OFF_TRACK_PENALTY;
        }
        r
    }

    fn action_bound(&self) -> f64 {
        self.max_force
    }

    fn initial_state(&self, rng: &mut StreamRng) -> [f64; 4] {
        core::array::from_fn(|_| rng.random_range(-0.05..0.05))
    }
}

/// Maps states to actions, one call per control step.
pub trait Controller<S> {
    /// Restores the controller to its initial (zero-plan) state.
    fn reset(&mut self);

    fn act(&mut self, state: &S, rng: &mut StreamRng) -> Result<f64>;
}

/// Always applies zero action.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPolicy;

impl<S> Controller<S> for ZeroPolicy {
    fn reset(&mut self) {}

    fn act(&mut self, _state: &S, _rng: &mut StreamRng) -> Result<f64> {
        Ok(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub cumulative_reward: f64,
    pub per_step_rewards: Vec<f64>,
    pub final_state: Vec<f64>,
    pub seed: u64,
}

/// Runs `n_steps` control steps on the true dynamics.
///
/// The controller is reset first. Each step the controller's action is applied
/// to `true_params` and the reward of the resulting state is recorded.
pub fn run_episode<D, C>(
    dynamics: &D,
    controller: &mut C,
    true_params: &PhysicalParams,
    n_steps: usize,
    seed: u64,
) -> Result<EpisodeResult>
where
    D: Dynamics,
    C: Controller<D::State>,
{
    if n_steps == 0 {
        return Err(Error::InvalidConfig("episode needs at least one step".into()));
    }
    true_params.validate()?;
    let mut rng = substream(seed, 0);
    controller.reset();
    let mut state = dynamics.initial_state(&mut rng);
    let mut rewards = Vec::with_capacity(n_steps);
    for step in 0..n_steps {
        let action = controller.act(&state, &mut rng).map_err(|e| match e {
            Error::NonFinite | Error::NoValidRollout => Error::EpisodeDiverged { step },
            other => other,
        })?;
        let applied = dynamics.clip(action);
        state = dynamics.step(&state, applied, true_params, DT).map_err(|_| Error::EpisodeDiverged { step })?;
        rewards.push(dynamics.reward(&state, applied));
    }
    Ok(EpisodeResult {
        cumulative_reward: rewards.iter().sum(),
        per_step_rewards: rewards,
        final_state: state.as_slice().to_vec(),
        seed,
    })
}

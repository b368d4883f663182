//! Heteroscedastic Bayesian optimisation over `x = {ψ, φ}` and the baselines it
//! is compared against.

pub mod acquisition;
pub mod cmaes;
pub mod noise;
pub mod random;
pub mod space;
pub mod trace;
pub mod tune;

pub use acquisition::{maximize_acquisition, ucb};
pub use cmaes::{cma_es, CmaEsOptions};
pub use noise::{feature_map, fit_noise_model, fit_reward_trend, NoiseModel, RewardTrendModel};
pub use random::random_search;
pub use space::{latin_hypercube, Dim, SearchSpace};
pub use trace::{CurvePoint, Method, TraceRow, TuningTrace};
pub use tune::{tune, BoConfig, BoOutcome, SurrogateFit};

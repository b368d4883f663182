//! Joint tuning of sampling-based MPC hyper-parameters and dynamics-parameter
//! distributions with heteroscedastic Bayesian optimisation.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure numerics:
//! dynamics and rewards for two classic control tasks ([`env`]), gamma
//! parameter distributions ([`distparams`]), an MPPI controller ([`mppi`]),
//! Gaussian-process regression with per-point noise ([`gp`]) and the
//! optimisation loop with its baselines ([`hetbo`]). IO, configuration and the
//! command line live in the `adaptmpc` companion crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod distparams;
pub mod env;
pub mod error;
pub mod gp;
pub mod hetbo;
pub mod linalg;
pub mod math;
pub mod mppi;
pub mod optim;
pub mod rng;
pub mod task;

pub use error::{Error, Result};

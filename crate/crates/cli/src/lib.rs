//! Experiment harness for `adaptmpc-core`: configuration files and presets,
//! tuning campaigns over several seeds, reward-landscape grids, point
//! evaluation, run artifacts and plot-data export.

pub mod artifact;
pub mod commands;
pub mod config;
pub mod error;
pub mod objective;

pub use error::HarnessError;

//! Float functions, always taken from `libm`.
//!
//! Method calls such as `x.sin()` resolve to std's inherent methods as soon as
//! any crate in the build links std, and to the `libm` fallback otherwise. The
//! two differ in the last bit for some inputs, and the controller loop
//! amplifies that into different episodes. Everything non-exact goes through
//! here so results do not depend on what else is compiled in.

pub use libm::{cos, exp, floor, log as ln, pow as powf, sin, sqrt};

pub fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

pub fn sq(x: f64) -> f64 {
    x * x
}

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lower bound required of scale-like coordinates (standard deviations,
/// temperature, perturbation scale).
pub const SCALE_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dim {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    /// Scale-like coordinate; its lower bound must be at least [`SCALE_FLOOR`].
    #[serde(default)]
    pub scale: bool,
}

impl Dim {
    pub fn free(name: impl ToString, lower: f64, upper: f64) -> Self {
        Self { name: name.to_string(), lower, upper, scale: false }
    }

    pub fn scale(name: impl ToString, lower: f64, upper: f64) -> Self {
        Self { name: name.to_string(), lower, upper, scale: true }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Box bounds of the decision variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub dims: Vec<Dim>,
}

impl SearchSpace {
    pub fn new(dims: Vec<Dim>) -> Result<Self> {
        let space = Self { dims };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidConfig("search space has no dimensions".into()));
        }
        for d in &self.dims {
            if !(d.lower.is_finite() && d.upper.is_finite() && d.lower < d.upper) {
                return Err(Error::InvalidConfig(alloc::format!("{}: lower must be below upper", d.name)));
            }
            if d.scale && d.lower < SCALE_FLOOR {
                return Err(Error::InvalidConfig(alloc::format!("{}: lower bound must be at least {SCALE_FLOOR:e}", d.name)));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.dims).map(|(v, d)| (v - d.lower) / d.width()).collect()
    }

    /// Maps a unit-box point to raw coordinates, clamped to the bounds.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.dims).map(|(v, d)| (d.lower + v * d.width()).clamp(d.lower, d.upper)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.dims).all(|(v, d)| *v >= d.lower && *v <= d.upper)
    }

    pub fn center(&self) -> Vec<f64> {
        self.dims.iter().map(|d| 0.5 * (d.lower + d.upper)).collect()
    }
}

/// `n` points in `[0,1]^d`, one per stratum in every coordinate, jittered
/// uniformly inside the stratum.
pub fn latin_hypercube<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = alloc::vec![alloc::vec![0.0; d]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..d {
        perm.shuffle(rng);
        for (i, &stratum) in perm.iter().enumerate() {
            points[i][k] = (stratum as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    points
}

//! Gamma-distributed dynamics parameters, parameterized by mean and standard
//! deviation and converted to shape/rate for sampling.

use alloc::string::{String, ToString};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::math;
use crate::rng::{open01, standard_normal};
use crate::{Error, Result};

/// Smallest standard deviation used for sampling; smaller values are clamped.
pub const SIGMA_FLOOR: f64 = 1e-5;

/// Distribution of one randomized physical parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSpec {
    pub name: String,
    pub mu: f64,
    pub sigma: f64,
}

impl GammaSpec {
    pub fn new(name: impl ToString, mu: f64, sigma: f64) -> Result<Self> {
        let spec = Self { name: name.to_string(), mu, sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.mu.is_finite() && self.sigma.is_finite() && self.mu > 0.0 && self.sigma > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec { name: self.name.clone(), mu: self.mu, sigma: self.sigma })
        }
    }

    /// `(shape, rate)` with shape = μ²/σ² and rate = μ/σ².
    pub fn to_shape_rate(&self) -> Result<(f64, f64)> {
        self.validate()?;
        let var = math::sq(self.sigma.max(SIGMA_FLOOR));
        Ok((self.mu * self.mu / var, self.mu / var))
    }

    /// One draw from the gamma distribution this spec describes.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let (shape, rate) = self.to_shape_rate()?;
        // Very small shapes underflow to zero; keep draws strictly positive.
        Ok(sample_gamma(shape, rate, rng).max(f64::MIN_POSITIVE))
    }
}

/// Marsaglia–Tsang squeeze sampler; shapes below one use the
/// `G(α+1)·U^(1/α)` boost.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0 && rate > 0.0);
    if shape < 1.0 {
        let u = open01(rng);
        return sample_gamma(shape + 1.0, rate, rng) * math::powf(u, 1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / math::sqrt(9.0 * d);
    loop {
        let x = standard_normal(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = open01(rng);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || math::ln(u) < 0.5 * x2 + d * (1.0 - v + math::ln(v)) {
            return d * v / rate;
        }
    }
}

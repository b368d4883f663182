//! Two-stage parametric noise model.
//!
//! A generalized linear model `ĝ(x) = αᵀρ(x)` is fitted to the targets, then
//! the absolute residuals are regressed in log space onto the same features,
//! giving `σ_ν(x) = z·exp(βᵀρ(x)) + ζ`.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::gp::ObservationSet;
use crate::linalg::{dot, least_squares, penalized_least_squares, Matrix};
use crate::math;
use crate::{Error, Result};

pub const DEFAULT_DEGREE: usize = 10;
/// Ridge penalty used when a least-squares design needs regularizing.
pub const RIDGE: f64 = 1e-6;
const ZETA_FRACTION: f64 = 0.05;
const ZETA_FLOOR: f64 = 1e-6;
/// Penalty on the non-bias weights of the log-noise regression. The log of an
/// absolute residual is a heavy-tailed target and a degree-10 polynomial fitted
/// to it without shrinkage swings wildly near the box edges.
pub const NOISE_RIDGE: f64 = 1.0;

/// `[1, x₁, x₁², …, x₁^deg, x₂, …, x_d^deg]`; no cross terms.
pub fn feature_map(x: &[f64], degree: usize) -> Vec<f64> {
    let mut phi = Vec::with_capacity(1 + x.len() * degree);
    phi.push(1.0);
    for &v in x {
        let mut p = 1.0;
        for _ in 0..degree {
            p *= v;
            phi.push(p);
        }
    }
    phi
}

fn design(data: &ObservationSet, degree: usize) -> Matrix {
    let rows: Vec<Vec<f64>> = data.points().iter().map(|x| feature_map(x, degree)).collect();
    Matrix::from_rows(&rows)
}

/// `ĝ(x) = αᵀρ(x)` on the standardized target scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardTrendModel {
    pub alpha: Vec<f64>,
    pub degree: usize,
    /// The design was rank deficient and the ridge penalty was switched on.
    pub regularized: bool,
}

impl RewardTrendModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.alpha, &feature_map(x, self.degree))
    }
}

/// Least-squares fit of the standardized targets on `feature_map`.
///
/// Plain least squares when the design has full column rank; otherwise a ridge
/// penalty of [`RIDGE`] is forced on and recorded in the result.
pub fn fit_reward_trend(data: &ObservationSet, degree: usize) -> Result<RewardTrendModel> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let fit = least_squares(&design(data, degree), &data.y(), 0.0, RIDGE)?;
    Ok(RewardTrendModel { alpha: fit.coefficients, degree, regularized: fit.regularized })
}

/// `σ_ν(x) = z·exp(βᵀρ(x)) + ζ`. With `z = 0` the model is homoscedastic with
/// noise standard deviation ζ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub z: f64,
    /// Feature weights; the bias slot is zero because `z` carries it.
    pub beta: Vec<f64>,
    pub zeta: f64,
    pub degree: usize,
    /// Too few points for the log-space fit; `ζ` holds the residual std.
    #[serde(default)]
    pub fallback: bool,
}

impl NoiseModel {
    pub fn constant(sigma: f64) -> Self {
        Self { z: 0.0, beta: Vec::new(), zeta: sigma, degree: 0, fallback: false }
    }

    pub fn is_constant(&self) -> bool {
        self.z == 0.0
    }

    pub fn sigma(&self, x: &[f64]) -> f64 {
        if self.is_constant() {
            return self.zeta;
        }
        self.z * math::exp(dot(&self.beta, &feature_map(x, self.degree))) + self.zeta
    }

    /// Copy with the free scale parameter (`z`, or `ζ` when constant) replaced.
    pub fn with_scale(&self, scale: f64) -> Self {
        let mut m = self.clone();
        if self.is_constant() {
            m.zeta = scale;
        } else {
            m.z = scale;
        }
        m
    }

    pub fn scale(&self) -> f64 {
        if self.is_constant() {
            self.zeta
        } else {
            self.z
        }
    }

    /// `σ_ν²(x_i)` for every training point.
    pub fn variances(&self, data: &ObservationSet) -> Vec<f64> {
        data.points().iter().map(|x| math::sq(self.sigma(x))).collect()
    }
}

/// Fits the residual model `|y − ĝ(x)| ≈ z·exp(βᵀρ(x)) + ζ`.
///
/// ζ is fixed at 5% of the median residual (floored at 1e-6); the remainder is
/// fitted as `log(max(r − ζ, ζ)) = log z + βᵀρ(x)`, with a [`NOISE_RIDGE`]
/// penalty on every weight except the bias.
/// With fewer than `m + 1` points the model falls back to a constant
/// `σ_ν = std(r)`.
pub fn fit_noise_model(data: &ObservationSet, trend: &RewardTrendModel, degree: usize) -> Result<NoiseModel> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let y = data.y();
    let residuals: Vec<f64> = data.points().iter().zip(&y).map(|(x, yi)| (yi - trend.predict(x)).abs()).collect();
    let m = 1 + data.dim() * degree;
    if data.len() < m + 1 {
        let n = residuals.len() as f64;
        let mean = residuals.iter().sum::<f64>() / n;
        let std = math::sqrt(residuals.iter().map(|r| math::sq(r - mean)).sum::<f64>() / n);
        let mut model = NoiseModel::constant(std.max(ZETA_FLOOR));
        model.fallback = true;
        return Ok(model);
    }
    let zeta = (ZETA_FRACTION * median(&residuals)).max(ZETA_FLOOR);
    // Residuals at or below ζ are floored at ζ rather than at a tiny constant,
    // which would turn them into log-space outliers that dominate the fit.
    let targets: Vec<f64> = residuals.iter().map(|r| math::ln((r - zeta).max(zeta))).collect();
    let mut penalties = vec![NOISE_RIDGE; m];
    penalties[0] = 0.0;
    let mut beta = penalized_least_squares(&design(data, degree), &targets, &penalties)?;
    let z = math::exp(beta[0]);
    beta[0] = 0.0;
    Ok(NoiseModel { z, beta, zeta, degree, fallback: false })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Initial guess and bounds for the free noise scale of `model`.
pub fn scale_bounds(model: &NoiseModel) -> (f64, (f64, f64)) {
    if model.is_constant() {
        let s = model.zeta.clamp(1e-3, 3.0);
        (s, (1e-3, 3.0))
    } else {
        let z = model.z;
        (z, (z * math::exp(-5.0), z * math::exp(5.0)))
    }
}

//! Gaussian-process regression with a squared-exponential ARD kernel and an
//! arbitrary diagonal noise covariance.
//!
//! Targets are standardized by [`ObservationSet`] and the prior mean is zero
//! on that scale. Inputs are expected in the unit box.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, Cholesky, Matrix};
use crate::math;
use crate::optim::{minimize_box, MinimizeOptions};
use crate::{Error, Result};

pub const SIGNAL_STD_BOUNDS: (f64, f64) = (0.05, 10.0);
pub const LENGTHSCALE_BOUNDS: (f64, f64) = (0.01, 10.0);
/// Rows closer than this are treated as duplicates and nudged apart.
pub const DUPLICATE_RADIUS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// σ_n².
    pub signal_var: f64,
    /// One lengthscale per input dimension.
    pub lengthscales: Vec<f64>,
}

impl KernelParams {
    pub fn isotropic(signal_var: f64, lengthscale: f64, dim: usize) -> Self {
        Self { signal_var, lengthscales: vec![lengthscale; dim] }
    }
}

/// `σ_n²·exp(−½·Σ_k ((x_k − x'_k)/ℓ_k)²)`.
pub fn kernel(x: &[f64], x2: &[f64], params: &KernelParams) -> f64 {
    let r2: f64 = x
        .iter()
        .zip(x2)
        .zip(&params.lengthscales)
        .map(|((a, b), l)| {
            let d = (a - b) / l;
            d * d
        })
        .sum();
    params.signal_var * math::exp(-0.5 * r2)
}

/// Evaluated points (unit-box inputs) and their rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    dim: usize,
    x: Vec<Vec<f64>>,
    raw_y: Vec<f64>,
    y_mean: f64,
    y_std: f64,
}

impl ObservationSet {
    pub fn new(dim: usize) -> Self {
        Self { dim, x: Vec::new(), raw_y: Vec::new(), y_mean: 0.0, y_std: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn raw_y(&self) -> &[f64] {
        &self.raw_y
    }

    /// Appends an observation. A point within [`DUPLICATE_RADIUS`] of an
    /// existing row is shifted along its first coordinate until it is not.
    pub fn push(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: x.len() });
        }
        let mut x = x;
        let mut k = 0;
        while self.x.iter().any(|row| dist2(row, &x) < DUPLICATE_RADIUS * DUPLICATE_RADIUS) {
            k += 1;
            let nudge = 1e-9 * k as f64;
            x[0] = if x[0] + nudge <= 1.0 { x[0] + nudge } else { x[0] - nudge };
        }
        self.x.push(x);
        self.raw_y.push(y);
        Ok(())
    }

    /// Recomputes the standardization from the current targets.
    pub fn standardize(&mut self) {
        let n = self.raw_y.len();
        if n == 0 {
            return;
        }
        let mean = self.raw_y.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            math::sqrt(self.raw_y.iter().map(|y| math::sq(y - mean)).sum::<f64>() / (n - 1) as f64)
        } else {
            0.0
        };
        self.y_mean = mean;
        self.y_std = if std > 1e-12 { std } else { 1.0 };
    }

    pub fn set_stats(&mut self, mean: f64, std: f64) {
        self.y_mean = mean;
        self.y_std = std;
    }

    /// `(mean, std)` used to standardize targets.
    pub fn stats(&self) -> (f64, f64) {
        (self.y_mean, self.y_std)
    }

    /// Standardized targets.
    pub fn y(&self) -> Vec<f64> {
        self.raw_y.iter().map(|y| (y - self.y_mean) / self.y_std).collect()
    }

    pub fn to_raw(&self, standardized: f64) -> f64 {
        self.y_mean + self.y_std * standardized
    }

    /// Index of the largest target.
    pub fn argmax(&self) -> Option<usize> {
        (0..self.raw_y.len()).reduce(|best, i| if self.raw_y[i] > self.raw_y[best] { i } else { best })
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub mean: f64,
    pub variance: f64,
}

fn gram(points: &[Vec<f64>], params: &KernelParams, noise_diag: &[f64]) -> Matrix {
    let n = points.len();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel(&points[i], &points[j], params);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += noise_diag[i];
    }
    k
}

/// A GP conditioned on data: cached Cholesky factor of `K + Σ_ν` and weights.
#[derive(Debug, Clone)]
pub struct ConditionedGp {
    params: KernelParams,
    points: Vec<Vec<f64>>,
    chol: Cholesky,
    alpha: Vec<f64>,
}

impl ConditionedGp {
    /// Conditions on `data` with `noise_diag[i] = σ_ν²(x_i)`.
    pub fn new(params: &KernelParams, noise_diag: &[f64], data: &ObservationSet) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        if noise_diag.len() != data.len() {
            return Err(Error::Dimension { expected: data.len(), got: noise_diag.len() });
        }
        let chol = Cholesky::new(&gram(data.points(), params, noise_diag))?;
        let alpha = chol.solve(&data.y());
        Ok(Self { params: params.clone(), points: data.points().to_vec(), chol, alpha })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Posterior of the latent function at `x` on the standardized scale.
    pub fn posterior(&self, x: &[f64]) -> Posterior {
        let k_star: Vec<f64> = self.points.iter().map(|p| kernel(x, p, &self.params)).collect();
        let mean = dot(&k_star, &self.alpha);
        let v = self.chol.solve_lower(&k_star);
        let variance = (kernel(x, x, &self.params) - dot(&v, &v)).max(0.0);
        Posterior { mean, variance }
    }
}

/// `−½yᵀ(K+Σ_ν)⁻¹y − ½log|K+Σ_ν| − (n/2)log 2π` on standardized targets.
pub fn log_marginal_likelihood(params: &KernelParams, noise_diag: &[f64], data: &ObservationSet) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let chol = Cholesky::new(&gram(data.points(), params, noise_diag))?;
    let y = data.y();
    let alpha = chol.solve(&y);
    let n = y.len() as f64;
    Ok(-0.5 * dot(&y, &alpha) - 0.5 * chol.log_det() - 0.5 * n * math::ln(2.0 * core::f64::consts::PI))
}

/// The single free noise parameter of a noise family, with its bounds.
pub struct NoiseScaling<'a> {
    pub initial: f64,
    pub bounds: (f64, f64),
    /// Noise variances at the training points for a value of the parameter.
    pub diag: &'a dyn Fn(f64) -> Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { restarts: 10, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFit {
    pub params: KernelParams,
    pub noise_scale: f64,
    /// `None` when the fallback parameters do not admit a factorization.
    pub log_likelihood: Option<f64>,
    /// Every start failed and the heuristic fallback was returned.
    pub degraded: bool,
}

/// Maximum-likelihood kernel and noise-scale fit.
///
/// Optimizes `(log s, log σ_n, log ℓ_1..ℓ_d)` inside positive boxes from
/// `restarts` starts: the first at `(s₀, 1, 0.5)`, the rest uniform in the
/// log box.
pub fn fit_kernel<R: Rng + ?Sized>(
    data: &ObservationSet,
    noise: &NoiseScaling<'_>,
    opts: &FitOptions,
    rng: &mut R,
) -> Result<KernelFit> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let d = data.dim();
    let mut lower = vec![math::ln(noise.bounds.0), math::ln(SIGNAL_STD_BOUNDS.0)];
    let mut upper = vec![math::ln(noise.bounds.1), math::ln(SIGNAL_STD_BOUNDS.1)];
    lower.extend(core::iter::repeat_n(math::ln(LENGTHSCALE_BOUNDS.0), d));
    upper.extend(core::iter::repeat_n(math::ln(LENGTHSCALE_BOUNDS.1), d));

    let decode = |theta: &[f64]| -> (f64, KernelParams) {
        let sig = math::exp(theta[1]);
        (math::exp(theta[0]), KernelParams { signal_var: sig * sig, lengthscales: theta[2..].iter().map(|&t| math::exp(t)).collect() })
    };
    let mut neg_lml = |theta: &[f64]| -> f64 {
        let (s, params) = decode(theta);
        match log_marginal_likelihood(&params, &(noise.diag)(s), data) {
            Ok(v) => -v,
            Err(_) => f64::INFINITY,
        }
    };

    let minimize_opts = MinimizeOptions { max_iter: opts.max_iter, ..Default::default() };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for r in 0..opts.restarts.max(1) {
        let start: Vec<f64> = if r == 0 {
            let mut s = vec![math::ln(noise.initial), 0.0];
            s.extend(core::iter::repeat_n(math::ln(0.5), d));
            s.iter().zip(lower.iter().zip(&upper)).map(|(v, (l, u))| v.clamp(*l, *u)).collect()
        } else {
            lower.iter().zip(&upper).map(|(l, u)| l + (u - l) * rng.random::<f64>()).collect()
        };
        let m = minimize_box(&mut neg_lml, &start, &lower, &upper, &minimize_opts);
        if m.value.is_finite() && best.as_ref().is_none_or(|(_, v)| m.value < *v) {
            best = Some((m.x, m.value));
        }
    }

    match best {
        Some((theta, value)) => {
            let (noise_scale, params) = decode(&theta);
            Ok(KernelFit { params, noise_scale, log_likelihood: Some(-value), degraded: false })
        }
        None => {
            let params = KernelParams::isotropic(1.0, median_distance(data.points()).max(LENGTHSCALE_BOUNDS.0), d);
            let ll = log_marginal_likelihood(&params, &(noise.diag)(noise.initial), data).ok();
            Ok(KernelFit { params, noise_scale: noise.initial, log_likelihood: ll, degraded: true })
        }
    }
}

/// Median pairwise Euclidean distance (1.0 for fewer than two points).
pub fn median_distance(points: &[Vec<f64>]) -> f64 {
    let mut d: Vec<f64> = Vec::new();
    for i in 0..points.len() {
        for j in 0..i {
            d.push(math::sqrt(dist2(&points[i], &points[j])));
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

//! (μ_w, λ)-CMA-ES on the unit box, maximizing the objective.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::space::SearchSpace;
use super::trace::{Method, Recorder, TuningTrace};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::math;
use crate::rng::standard_normal;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmaEsOptions {
    /// Initial step size as a fraction of each coordinate's range.
    pub initial_step: f64,
    /// Resampling attempts for out-of-box candidates before clipping.
    pub max_resample: usize,
}

impl Default for CmaEsOptions {
    fn default() -> Self {
        Self { initial_step: 0.3, max_resample: 100 }
    }
}

/// Offspring per generation, `4 + ⌊3·ln d⌋`.
pub fn population_size(d: usize) -> usize {
    4 + math::floor(3.0 * math::ln(d as f64)) as usize
}

struct Strategy {
    n: usize,
    lambda: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
    chi_n: f64,
}

impl Strategy {
    fn new(n: usize) -> Self {
        let nf = n as f64;
        let lambda = population_size(n);
        let mu = lambda / 2;
        let raw: Vec<f64> = (0..mu).map(|i| math::ln(mu as f64 + 0.5) - math::ln((i + 1) as f64)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (math::sqrt((mu_eff - 1.0) / (nf + 1.0)) - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let c_1 = 2.0 / (math::sq(nf + 1.3) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / (math::sq(nf + 2.0) + mu_eff));
        let chi_n = math::sqrt(nf) * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Self { n, lambda, weights, mu_eff, c_sigma, d_sigma, c_c, c_1, c_mu, chi_n }
    }
}

struct State {
    mean: Vec<f64>,
    sigma: f64,
    cov: Matrix,
    p_sigma: Vec<f64>,
    p_c: Vec<f64>,
    generation: usize,
}

impl State {
    fn fresh(mean: Vec<f64>, sigma: f64) -> Self {
        let n = mean.len();
        Self { mean, sigma, cov: Matrix::identity(n), p_sigma: vec![0.0; n], p_c: vec![0.0; n], generation: 0 }
    }
}

/// Runs CMA-ES for `budget` objective evaluations. Starts at the centre of the
/// box; candidates outside it are resampled, and a degenerate covariance
/// restarts the search from the incumbent with the initial step size.
pub fn cma_es<F, E, R>(
    mut objective: F,
    space: &SearchSpace,
    budget: usize,
    opts: &CmaEsOptions,
    rng: &mut R,
) -> Result<TuningTrace>
where
    F: FnMut(&[f64]) -> core::result::Result<f64, E>,
    R: Rng + ?Sized,
{
    space.validate()?;
    let n = space.dim();
    let st = Strategy::new(n);
    let mut state = State::fresh(vec![0.5; n], opts.initial_step);
    let mut recorder = Recorder::new(Method::CmaEs);
    let mut incumbent: Option<(Vec<f64>, f64)> = None;

    while recorder.len() < budget {
        let (eigvals, basis) = symmetric_eigen(&state.cov);
        let max_eig = eigvals.iter().copied().fold(0.0, f64::max);
        let min_eig = eigvals.iter().copied().fold(f64::INFINITY, f64::min);
        let degenerate = !(min_eig > 0.0)
            || !max_eig.is_finite()
            || max_eig / min_eig > 1e14
            || !(state.sigma * math::sqrt(max_eig) > 1e-12)
            || !state.sigma.is_finite();
        if degenerate {
            let restart_at = incumbent.as_ref().map_or_else(|| vec![0.5; n], |(u, _)| u.clone());
            state = State::fresh(restart_at, opts.initial_step);
            continue;
        }
        let scales: Vec<f64> = eigvals.iter().map(|&v| math::sqrt(v)).collect();

        let mut offspring: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(st.lambda);
        for _ in 0..st.lambda {
            if recorder.len() >= budget {
                break;
            }
            let mut y = vec![0.0; n];
            let mut x = vec![0.0; n];
            for attempt in 0..=opts.max_resample {
                let z: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
                for i in 0..n {
                    y[i] = (0..n).map(|k| basis[(i, k)] * scales[k] * z[k]).sum();
                    x[i] = state.mean[i] + state.sigma * y[i];
                }
                if x.iter().all(|v| (0.0..=1.0).contains(v)) {
                    break;
                }
                if attempt == opts.max_resample {
                    for i in 0..n {
                        x[i] = x[i].clamp(0.0, 1.0);
                        y[i] = (x[i] - state.mean[i]) / state.sigma;
                    }
                }
            }
            let raw = space.from_unit(&x);
            let out = objective(&raw);
            let reward = recorder.record(raw, out).unwrap_or(f64::NEG_INFINITY);
            if incumbent.as_ref().is_none_or(|(_, r)| reward > *r) {
                incumbent = Some((x.clone(), reward));
            }
            offspring.push((x, y, reward));
        }
        if offspring.len() < st.lambda {
            break;
        }
        offspring.sort_by(|a, b| b.2.total_cmp(&a.2));
        update(&st, &mut state, &offspring, &eigvals, &basis);
    }
    recorder.finish(0)
}

fn update(st: &Strategy, state: &mut State, ranked: &[(Vec<f64>, Vec<f64>, f64)], eigvals: &[f64], basis: &Matrix) {
    let n = st.n;
    let mut y_w = vec![0.0; n];
    for (w, (_, y, _)) in st.weights.iter().zip(ranked) {
        for i in 0..n {
            y_w[i] += w * y[i];
        }
    }
    for i in 0..n {
        state.mean[i] += state.sigma * y_w[i];
    }

    // C^{-1/2}·y_w = B·D^{-1}·Bᵀ·y_w
    let bt_y: Vec<f64> = (0..n).map(|k| (0..n).map(|i| basis[(i, k)] * y_w[i]).sum::<f64>() / math::sqrt(eigvals[k])).collect();
    let c_inv_sqrt_y: Vec<f64> = (0..n).map(|i| (0..n).map(|k| basis[(i, k)] * bt_y[k]).sum()).collect();
    let cs = math::sqrt(st.c_sigma * (2.0 - st.c_sigma) * st.mu_eff);
    for i in 0..n {
        state.p_sigma[i] = (1.0 - st.c_sigma) * state.p_sigma[i] + cs * c_inv_sqrt_y[i];
    }
    let ps_norm = math::sqrt(state.p_sigma.iter().map(|v| v * v).sum::<f64>());
    state.generation += 1;
    let decay = 1.0 - math::powf(1.0 - st.c_sigma, 2.0 * state.generation as f64);
    let h_sigma = if ps_norm / math::sqrt(decay) < (1.4 + 2.0 / (n as f64 + 1.0)) * st.chi_n { 1.0 } else { 0.0 };
    let cc = math::sqrt(st.c_c * (2.0 - st.c_c) * st.mu_eff);
    for i in 0..n {
        state.p_c[i] = (1.0 - st.c_c) * state.p_c[i] + h_sigma * cc * y_w[i];
    }

    let old_weight = 1.0 - st.c_1 - st.c_mu;
    let correction = (1.0 - h_sigma) * st.c_c * (2.0 - st.c_c);
    for i in 0..n {
        for j in 0..n {
            let rank_mu: f64 = st.weights.iter().zip(ranked).map(|(w, (_, y, _))| w * y[i] * y[j]).sum();
            state.cov[(i, j)] = old_weight * state.cov[(i, j)]
                + st.c_1 * (state.p_c[i] * state.p_c[j] + correction * state.cov[(i, j)])
                + st.c_mu * rank_mu;
        }
    }
    state.sigma *= math::exp((st.c_sigma / st.d_sigma) * (ps_norm / st.chi_n - 1.0));
}

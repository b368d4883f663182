//! Box-constrained limited-memory quasi-Newton minimization with
//! finite-difference gradients, and a multi-start driver around it.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::dot;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Stop when the projected gradient's max-norm falls below this.
    pub grad_tol: f64,
    /// Stop when the relative decrease of one iteration falls below this.
    pub f_tol: f64,
    pub memory: usize,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iter: 200, grad_tol: 1e-6, f_tol: 1e-10, memory: 8, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, &l), &u) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(l, u);
    }
}

/// Central differences, one-sided at the bounds.
pub fn numeric_gradient(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x: &[f64],
    fx: f64,
    lower: &[f64],
    upper: &[f64],
    rel_step: f64,
) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = rel_step * x[i].abs().max(1.0);
        let up = (x[i] + h).min(upper[i]);
        let down = (x[i] - h).max(lower[i]);
        probe[i] = up;
        let f_up = if up > x[i] { f(&probe) } else { fx };
        probe[i] = down;
        let f_down = if down < x[i] { f(&probe) } else { fx };
        probe[i] = x[i];
        let span = up - down;
        g[i] = if span > 0.0 { (f_up - f_down) / span } else { 0.0 };
        if !g[i].is_finite() {
            g[i] = 0.0;
        }
    }
    g
}

/// Minimizes `f` over the box `[lower, upper]` starting from `x0`.
///
/// Projected L-BFGS: variables pinned at a bound with the gradient pushing
/// outward are frozen for the iteration, the two-loop recursion runs on the
/// rest, and a backtracking Armijo search runs along the projected path.
/// Non-finite function values are treated as +∞.
pub fn minimize_box(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &MinimizeOptions,
) -> Minimum {
    let n = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let mut fx = eval(&x);
    if !fx.is_finite() {
        return Minimum { x, value: fx, iterations: 0 };
    }
    let mut g = numeric_gradient(&mut eval, &x, fx, lower, upper, opts.fd_step);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)))
            .collect();
        let pg_norm = (0..n).filter(|&i| free[i]).map(|i| g[i].abs()).fold(0.0, f64::max);
        if pg_norm < opts.grad_tol {
            break;
        }

        let mut accepted = None;
        for use_memory in [true, false] {
            if !use_memory && history.is_empty() {
                continue;
            }
            let mut d = if use_memory && !history.is_empty() {
                two_loop(&g, &history, &free)
            } else {
                let scale = 1.0 / pg_norm.max(1.0);
                (0..n).map(|i| if free[i] { -g[i] * scale } else { 0.0 }).collect()
            };
            if dot(&d, &g) >= 0.0 {
                let scale = 1.0 / pg_norm.max(1.0);
                d = (0..n).map(|i| if free[i] { -g[i] * scale } else { 0.0 }).collect();
            }
            let mut t = 1.0;
            for _ in 0..40 {
                let mut trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
                project(&mut trial, lower, upper);
                let step: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                let decrease = dot(&g, &step);
                if step.iter().all(|s| *s == 0.0) {
                    break;
                }
                let ft = eval(&trial);
                if ft <= fx + 1e-4 * decrease && ft.is_finite() {
                    accepted = Some((trial, ft));
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
            history.clear();
        }

        let Some((x_new, f_new)) = accepted else { break };
        let g_new = numeric_gradient(&mut eval, &x_new, f_new, lower, upper, opts.fd_step);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * math::sqrt(dot(&y, &y)) * math::sqrt(dot(&s, &s)) && sy > 0.0 {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let rel = (fx - f_new).abs() / fx.abs().max(f_new.abs()).max(1.0);
        x = x_new;
        fx = f_new;
        g = g_new;
        if rel < opts.f_tol {
            break;
        }
    }
    Minimum { x, value: fx, iterations }
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, free: &[bool]) -> Vec<f64> {
    let mask = |v: &[f64]| -> Vec<f64> { v.iter().zip(free).map(|(x, &f)| if f { *x } else { 0.0 }).collect() };
    let mut q = mask(g);
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let s = mask(s);
        let y = mask(y);
        let a = rho * dot(&s, &q);
        q.iter_mut().zip(&y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let (s_last, y_last, _) = history.back().expect("non-empty history");
    let gamma = dot(s_last, y_last) / dot(y_last, y_last);
    q.iter_mut().for_each(|v| *v *= gamma);
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let s = mask(s);
        let y = mask(y);
        let b = rho * dot(&y, &q);
        q.iter_mut().zip(&s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter().zip(free).map(|(v, &f)| if f { -v } else { 0.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_unconstrained() {
        let mut f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = MinimizeOptions { max_iter: 500, ..Default::default() };
        let m = minimize_box(&mut f, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], &opts);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn active_bound() {
        let mut f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 0.5).powi(2);
        let m = minimize_box(&mut f, &[0.2, 0.2], &[0.0, 0.0], &[1.0, 1.0], &MinimizeOptions::default());
        assert!((m.x[0] - 1.0).abs() < 1e-12 && m.x[1].abs() < 1e-12, "{m:?}");
    }

    #[test]
    fn infinite_start_returns_immediately() {
        let mut f = |_: &[f64]| f64::NAN;
        let m = minimize_box(&mut f, &[0.5], &[0.0], &[1.0], &MinimizeOptions::default());
        assert_eq!(m.iterations, 0);
        assert!(m.value.is_infinite());
    }
}

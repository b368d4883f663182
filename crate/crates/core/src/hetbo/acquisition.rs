use alloc::vec::Vec;
use rand::Rng;

use crate::gp::{ConditionedGp, ObservationSet, Posterior};
use crate::math;
use crate::optim::{minimize_box, MinimizeOptions};

/// Upper confidence bound `μ + δ·σ` with σ the posterior standard deviation.
pub fn ucb(posterior: &Posterior, delta: f64) -> f64 {
    posterior.mean + delta * math::sqrt(posterior.variance.max(0.0))
}

/// Multi-start bounded ascent of the UCB over the unit box.
///
/// Starts from the best observed point, then from `restarts` uniform draws.
/// The first start reaching the highest value wins.
pub fn maximize_acquisition<R: Rng + ?Sized>(
    gp: &ConditionedGp,
    data: &ObservationSet,
    delta: f64,
    restarts: usize,
    max_iter: usize,
    rng: &mut R,
) -> Vec<f64> {
    let d = data.dim();
    let lower = alloc::vec![0.0; d];
    let upper = alloc::vec![1.0; d];
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(restarts + 1);
    if let Some(i) = data.argmax() {
        starts.push(data.points()[i].iter().map(|v| v.clamp(0.0, 1.0)).collect());
    }
    for _ in 0..restarts {
        starts.push((0..d).map(|_| rng.random::<f64>()).collect());
    }
    let mut objective = |x: &[f64]| -ucb(&gp.posterior(x), delta);
    let opts = MinimizeOptions { max_iter, ..Default::default() };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in &starts {
        let m = minimize_box(&mut objective, start, &lower, &upper, &opts);
        if best.as_ref().is_none_or(|(_, v)| m.value < *v) {
            best = Some((m.x, m.value));
        }
    }
    best.map(|(x, _)| x).unwrap_or_else(|| alloc::vec![0.5; d])
}

use alloc::vec::Vec;
use rand::Rng;

use super::space::SearchSpace;
use super::trace::{Method, Recorder, TuningTrace};
use crate::Result;

/// Uniform random search with `evaluations` draws.
pub fn random_search<F, E, R>(mut objective: F, space: &SearchSpace, evaluations: usize, rng: &mut R) -> Result<TuningTrace>
where
    F: FnMut(&[f64]) -> core::result::Result<f64, E>,
    R: Rng + ?Sized,
{
    space.validate()?;
    let mut recorder = Recorder::new(Method::Random);
    for _ in 0..evaluations {
        let u: Vec<f64> = (0..space.dim()).map(|_| rng.random::<f64>()).collect();
        let x = space.from_unit(&u);
        let out = objective(&x);
        recorder.record(x, out);
    }
    recorder.finish(0)
}

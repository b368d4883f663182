use adaptmpc_core::gp::{ConditionedGp, KernelParams, ObservationSet};
use adaptmpc_core::hetbo::{
    fit_noise_model, fit_reward_trend, latin_hypercube, maximize_acquisition, random_search, ucb, Dim, SearchSpace,
};
use adaptmpc_core::rng::substream;
use proptest::prelude::*;

fn dataset(points: &[Vec<f64>], ys: &[f64]) -> ObservationSet {
    let mut data = ObservationSet::new(points[0].len());
    for (x, y) in points.iter().zip(ys) {
        data.push(x.clone(), *y).unwrap();
    }
    data.standardize();
    data
}

fn unit_points(n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, d), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posterior_variance_stays_below_prior(
        pts in unit_points(8, 2),
        ys in prop::collection::vec(-5.0..5.0f64, 8),
        noise in prop::collection::vec(0.0..0.5f64, 8),
        query in prop::collection::vec(-0.5..1.5f64, 2),
        signal in 0.1..4.0f64,
        ell in 0.05..2.0f64,
    ) {
        let params = KernelParams::isotropic(signal, ell, 2);
        let gp = ConditionedGp::new(&params, &noise, &dataset(&pts, &ys)).unwrap();
        let p = gp.posterior(&query);
        prop_assert!(p.variance >= 0.0);
        prop_assert!(p.variance <= signal + 1e-9);
    }

    #[test]
    fn extra_observation_never_adds_variance(
        pts in unit_points(7, 3),
        ys in prop::collection::vec(-5.0..5.0f64, 7),
        noise in 1e-3..0.5f64,
        query in prop::collection::vec(0.0..1.0f64, 3),
        ell in 0.1..1.5f64,
    ) {
        let params = KernelParams::isotropic(1.0, ell, 3);
        let before = dataset(&pts[..6], &ys[..6]);
        let mut after = dataset(&pts, &ys);
        // Same targets on both sides; only the extra point differs.
        let (m, s) = before.stats();
        after.set_stats(m, s);
        let v0 = ConditionedGp::new(&params, &[noise; 6], &before).unwrap().posterior(&query).variance;
        let v1 = ConditionedGp::new(&params, &[noise; 7], &after).unwrap().posterior(&query).variance;
        prop_assert!(v1 <= v0 + 1e-9, "{} > {}", v1, v0);
    }

    #[test]
    fn ucb_covers_noise_free_observations(seed in 0u64..1000, delta in 0.0..3.0f64) {
        let mut rng = substream(seed, 0);
        let pts = latin_hypercube(6, 2, &mut rng);
        let ys: Vec<f64> = pts.iter().map(|p| (4.0 * p[0]).sin() + p[1] * p[1]).collect();
        let data = dataset(&pts, &ys);
        let gp = ConditionedGp::new(&KernelParams::isotropic(1.0, 0.3, 2), &[0.0; 6], &data).unwrap();
        for (x, y) in data.points().iter().zip(data.y()) {
            prop_assert!(ucb(&gp.posterior(x), delta) >= y - 1e-6);
        }
    }

    #[test]
    fn acquisition_argmax_respects_the_box(seed in 0u64..1000, delta in 0.0..5.0f64, ell in 0.05..1.0f64) {
        let mut rng = substream(seed, 1);
        let pts = latin_hypercube(10, 3, &mut rng);
        let ys: Vec<f64> = pts.iter().map(|p| p.iter().sum::<f64>() * 3.0 - 10.0 * p[2] * p[2]).collect();
        let data = dataset(&pts, &ys);
        let gp = ConditionedGp::new(&KernelParams::isotropic(1.0, ell, 3), &[0.01; 10], &data).unwrap();
        let x = maximize_acquisition(&gp, &data, delta, 3, 30, &mut rng);
        prop_assert_eq!(x.len(), 3);
        prop_assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn noise_level_never_drops_below_zeta(
        seed in 0u64..1000,
        slope in 0.0..3.0f64,
        degree in 1usize..4,
        query in prop::collection::vec(-0.5..1.5f64, 2),
    ) {
        let mut rng = substream(seed, 2);
        let pts = latin_hypercube(40, 2, &mut rng);
        let ys: Vec<f64> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| p[0] - p[1] + slope * p[0] * if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let data = dataset(&pts, &ys);
        let trend = fit_reward_trend(&data, degree).unwrap();
        let model = fit_noise_model(&data, &trend, degree).unwrap();
        prop_assert!(model.sigma(&query) >= model.zeta);
        for x in data.points() {
            prop_assert!(model.sigma(x) >= model.zeta);
        }
    }

    #[test]
    fn best_so_far_is_the_running_max(seed in 0u64..1000, n in 1usize..40) {
        let space = SearchSpace::new(vec![Dim::free("a", -1.0, 1.0), Dim::scale("s", 1e-5, 0.1)]).unwrap();
        let mut k = 0;
        let objective = |x: &[f64]| {
            k += 1;
            if k % 7 == 3 { Err("diverged") } else { Ok(-(x[0] * 5.0).cos() * 100.0 + x[1]) }
        };
        let trace = random_search(objective, &space, n, &mut substream(seed, 3)).unwrap();
        let mut best = f64::NEG_INFINITY;
        for row in &trace.rows {
            best = best.max(row.reward);
            prop_assert_eq!(row.best, best);
            prop_assert!(space.contains(&row.x));
        }
        for pair in trace.curve().windows(2) {
            prop_assert!(pair[1].best_so_far >= pair[0].best_so_far);
        }
    }
}

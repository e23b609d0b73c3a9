use fspde_core::fraccalc::TimeGrid;
use fspde_core::levy::*;
use proptest::prelude::*;

const SAMPLES: usize = 4000;

fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn integrals(spec: &LevySpec, h: &StepFn, horizon: f64) -> Vec<f64> {
    (0..SAMPLES)
        .map(|k| {
            let path = sample_jump_path(spec, horizon, 7, k).unwrap();
            stochastic_integral_jump(std::slice::from_ref(h), &path, &[horizon]).unwrap()[0]
        })
        .collect()
}

#[test]
fn jump_integrals_have_zero_mean() {
    let h = StepFn::new(vec![0.0, 0.3, 1.0], vec![2.0, -0.5]).unwrap();
    for law in [JumpLaw::TwoPoint, JumpLaw::Uniform, JumpLaw::TruncatedGaussian] {
        let spec = LevySpec::new(3.0, law, 1.2, 1, SAMPLES).unwrap();
        let (m, se) = mean_and_error(&integrals(&spec, &h, 1.0));
        assert!(m.abs() <= 3.0 * se, "{law:?}: mean {m} with standard error {se}");
    }
}

#[test]
fn jump_integrals_satisfy_the_isometry() {
    let h = StepFn::new(vec![0.0, 0.4, 1.0], vec![1.5, 0.5]).unwrap();
    for law in [JumpLaw::TwoPoint, JumpLaw::Uniform, JumpLaw::TruncatedGaussian] {
        let spec = LevySpec::new(2.5, law, 0.8, 1, SAMPLES).unwrap();
        let squares: Vec<f64> = integrals(&spec, &h, 1.0).iter().map(|x| x * x).collect();
        let (m, se) = mean_and_error(&squares);
        let expected = moment_mp(&spec, 2.0).unwrap().powi(2) * h.lp_pow(2.0);
        assert!((m - expected).abs() <= 3.0 * se, "{law:?}: {m} vs {expected} (se {se})");
    }
}

#[test]
fn wiener_increments_have_the_right_variance() {
    let grid = TimeGrid::new(2.0, 50).unwrap();
    let w = sample_wiener(grid, 200, 11);
    let squares: Vec<f64> = (0..200).flat_map(|k| w.increments(k).iter().map(|x| x * x).collect::<Vec<_>>()).collect();
    let (m, se) = mean_and_error(&squares);
    assert!((m - grid.dt()).abs() <= 3.0 * se, "{m} vs {}", grid.dt());
}

#[test]
fn sampling_is_reproducible_and_copies_are_stable() {
    let few = LevySpec::new(4.0, JumpLaw::Uniform, 1.0, 2, 2).unwrap();
    let many = LevySpec { copies: 9, ..few };
    for k in 0..2 {
        let a = sample_jump_path(&few, 1.0, 42, k).unwrap();
        let b = sample_jump_path(&many, 1.0, 42, k).unwrap();
        assert_eq!(a, b);
        let bits = |p: &JumpPath| p.times().iter().map(|t| t.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
    assert_ne!(sample_jump_path(&few, 1.0, 42, 0).unwrap(), sample_jump_path(&few, 1.0, 43, 0).unwrap());
    let grid = TimeGrid::new(1.0, 16).unwrap();
    assert_eq!(sample_wiener(grid, 3, 5).increments(1), sample_wiener(grid, 5, 5).increments(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jump_moments_are_dominated_by_quadratic_variation(
        seed in any::<u64>(),
        p in 2.0f64..6.0,
        lambda in 0.5f64..20.0,
    ) {
        let spec = LevySpec::new(lambda, JumpLaw::Uniform, 1.0, 1, 1).unwrap();
        let path = sample_jump_path(&spec, 1.0, seed, 0).unwrap();
        let sum_p: f64 = (0..path.count()).map(|i| path.jump(i)[0].abs().powf(p)).sum();
        let qv = quad_variation(&[StepFn::constant(1.0, 1.0)], &path, 1.0).unwrap();
        prop_assert!(sum_p <= qv.powf(p / 2.0) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn jump_times_are_sorted_inside_the_horizon(seed in any::<u64>(), horizon in 0.1f64..5.0, copy in 0usize..8) {
        let spec = LevySpec::new(5.0, JumpLaw::TwoPoint, 1.0, 3, 8).unwrap();
        let path = sample_jump_path(&spec, horizon, seed, copy).unwrap();
        prop_assert!(path.times().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(path.times().iter().all(|&t| t > 0.0 && t <= horizon));
        for i in 0..path.count() {
            prop_assert!(path.jump(i).iter().all(|z| z.abs() == 1.0));
        }
    }
}

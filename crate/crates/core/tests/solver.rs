use std::f64::consts::PI;
use std::sync::Arc;

use fspde_core::fraccalc::{frac_integral_values, TimeGrid};
use fspde_core::levy::{JumpLaw, JumpPath, LevySpec};
use fspde_core::params::ProblemParams;
use fspde_core::solver::*;
use fspde_core::specfun::{ml, MLParams};
use fspde_core::torus::{Field, TorusGrid};
use proptest::prelude::*;

fn torus() -> TorusGrid {
    TorusGrid::new(1, 16, 2.0 * PI).unwrap()
}

fn data(g: TorusGrid, c: [f64; 4]) -> ProblemData {
    let u0 = Field::from_fn(g, move |x| c[0] * (2.0 * x[0]).cos());
    let f: SpaceTimeFn = Arc::new(move |t| Field::from_fn(g, move |x| c[1] * (1.0 + t) * x[0].sin()));
    let gk: SpaceTimeFn = Arc::new(move |t| Field::from_fn(g, move |x| c[2] * (3.0 * x[0] + t).cos()));
    let hk: SpaceTimeFn = Arc::new(move |_| Field::from_fn(g, move |x| c[3] * (1.0 + x[0].cos())));
    ProblemData { u0, v0: None, f: Some(f), g: vec![gk], h: vec![vec![hk]] }
}

fn noise(time: TimeGrid, seed: u64) -> Noise {
    let levy = LevySpec::new(4.0, JumpLaw::Uniform, 1.0, 1, 1).unwrap();
    Noise::sample(time, 1, Some(&levy), seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linear_solve_is_linear_in_the_data(
        c in prop::array::uniform4(-2.0f64..2.0),
        d in prop::array::uniform4(-2.0f64..2.0),
        s in -2.0f64..2.0,
        seed in any::<u64>(),
        alpha in 0.3f64..1.8,
    ) {
        let g = torus();
        let ps = ProblemParams::new(alpha, 0.5 * alpha, 0.5 * alpha, 2.0).unwrap();
        let time = TimeGrid::new(1.0, 16).unwrap();
        let nz = noise(time, seed);
        let mix: [f64; 4] = std::array::from_fn(|i| c[i] + s * d[i]);
        let a = solve_linear(&data(g, c), &ps, &g, time, &nz).unwrap();
        let b = solve_linear(&data(g, d), &ps, &g, time, &nz).unwrap();
        let ab = solve_linear(&data(g, mix), &ps, &g, time, &nz).unwrap();
        prop_assert_eq!(&a.times, &ab.times);
        let scale = 1.0 + a.max_abs() + s.abs() * b.max_abs();
        for i in 0..a.times.len() {
            let mut lin = a.values[i].clone();
            lin.axpy(s, &b.values[i]).unwrap();
            prop_assert!(ab.values[i].max_diff(&lin).unwrap() <= 1e-12 * scale);
        }
    }

    #[test]
    fn solutions_are_right_continuous_with_jumps_only_at_events(seed in any::<u64>(), alpha in 0.4f64..1.6) {
        let g = torus();
        let ps = ProblemParams::new(alpha, 0.5, alpha, 2.0).unwrap();
        let time = TimeGrid::new(1.0, 8).unwrap();
        let nz = noise(time, seed);
        let mut dat = data(g, [1.0, 0.0, 0.0, 1.0]);
        dat.g.clear();
        let sol = solve_linear(&dat, &ps, &g, time, &Noise { wiener: None, ..nz.clone() }).unwrap();
        let jumps = &nz.jumps[0];
        for (i, t) in sol.times.iter().enumerate() {
            let gap = sol.values[i].max_diff(&sol.left[i]).unwrap();
            match jumps.times().iter().position(|s| s == t) {
                Some(j) => {
                    let phi = Field::from_fn(g, |x| 1.0 + x[0].cos());
                    let want = phi.scaled(jumps.jump(j)[0]);
                    let mut diff = sol.values[i].clone();
                    diff.axpy(-1.0, &sol.left[i]).unwrap();
                    prop_assert!(diff.max_diff(&want).unwrap() < 1e-12);
                }
                None => prop_assert_eq!(gap, 0.0),
            }
        }
    }
}

#[test]
fn jumps_are_continuous_when_beta2_is_below_alpha() {
    let g = torus();
    let ps = ProblemParams::new(1.2, 0.5, 0.7, 2.0).unwrap();
    let time = TimeGrid::new(1.0, 64).unwrap();
    let path = JumpPath::from_jumps(vec![0.25], vec![1.0], 1, 1.0).unwrap();
    let h: Vec<Vec<SpaceTimeFn>> = vec![vec![Arc::new(move |_| Field::from_fn(g, |_| 1.0))]];
    let sol = stochastic_convolution_jump(&h, &ps, &g, time, &[path]).unwrap();
    let at = sol.index_of(0.25).unwrap();
    assert_eq!(sol.values[at].values(), sol.left[at].values());
    assert_eq!(sol.values[at].max_abs(), 0.0);
    // mode 0 after the jump is (t - s)^{alpha - beta2} / Gamma(1 + alpha - beta2)
    let i = sol.index_of(0.265625).unwrap();
    let lag: f64 = 0.015625;
    let want = lag.powf(0.5) * fspde_core::specfun::rgamma(1.5);
    assert!((sol.values[i].values()[0] - want).abs() < 1e-12);
    assert!(sol.values[i].values()[0] < 0.15);
}

#[test]
fn zero_data_and_noise_give_zero() {
    let g = torus();
    let ps = ProblemParams::new(0.7, 0.3, 0.6, 3.0).unwrap();
    let time = TimeGrid::new(1.0, 16).unwrap();
    let sol = solve_linear(&data(g, [0.0; 4]), &ps, &g, time, &noise(time, 3)).unwrap();
    assert_eq!(sol.max_abs(), 0.0);
}

#[test]
fn deterministic_solution_satisfies_the_integral_equation() {
    let g = torus();
    let k = 2.0;
    for alpha in [0.5, 0.9, 1.4] {
        let ps = ProblemParams::new(alpha, 0.5, 0.5, 2.0).unwrap();
        let time = TimeGrid::new(1.0, 1024).unwrap();
        let mut dat = ProblemData::initial(Field::from_fn(g, move |x| (k * x[0]).cos()));
        dat.f = Some(Arc::new(move |t| Field::from_fn(g, move |x| (1.0 + t * t) * (k * x[0]).cos())));
        let sol = deterministic_propagate(&dat, &ps, &g, time).unwrap();
        // amplitude of cos(kx): u = 1 + I^alpha(-k^2 u + 1 + t^2)
        let amp: Vec<f64> = sol.values.iter().map(|u| u.values()[0]).collect();
        let rhs: Vec<f64> = amp.iter().zip(&sol.times).map(|(u, t)| -k * k * u + 1.0 + t * t).collect();
        let iu = frac_integral_values(&rhs, time.dt(), alpha).unwrap();
        let res = amp.iter().zip(&iu).map(|(u, i)| (u - 1.0 - i).abs()).fold(0.0, f64::max);
        assert!(res < 2e-3, "alpha={alpha}: residual {res}");
    }
}

#[test]
fn picard_for_linear_damping_approaches_mittag_leffler() {
    let g = torus();
    let (alpha, c, k) = (0.8, 0.7, 2.0);
    let ps = ProblemParams::new(alpha, 0.5, 0.5, 2.0).unwrap();
    let error = |steps: usize| {
        let time = TimeGrid::new(1.0, steps).unwrap();
        let f = Nonlinearity::new(c, move |_, _, u| -c * u).unwrap();
        let u0 = Field::from_fn(g, move |x| (k * x[0]).cos());
        let data = SemilinearData { u0, v0: None, f: Some(f), g: Vec::new(), h: Vec::new() };
        let sol = solve_semilinear(&data, &ps, &g, time, &Noise::none(), PicardOptions::default()).unwrap();
        assert!(sol.provenance.ratios.iter().all(|&r| r < 1.0));
        let e = MLParams::new(alpha, 1.0).unwrap();
        sol.times
            .iter()
            .zip(&sol.values)
            .map(|(t, u)| (u.values()[0] - ml(e, -(k * k + c) * t.powf(alpha)).unwrap()).abs())
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [16, 64, 256].iter().map(|&n| error(n)).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 1e-3, "{errs:?}");
}

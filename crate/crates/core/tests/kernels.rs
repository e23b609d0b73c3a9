use fspde_core::fraccalc::{frac_integral_values, TimeGrid};
use fspde_core::kernels::*;
use fspde_core::specfun::rgamma;
use fspde_core::torus::TorusGrid;
use proptest::prelude::*;

fn time_profile(kind: KernelKind, alpha: f64, xi_sq: f64, grid: TimeGrid) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let t = grid.node(i);
            if t == 0.0 {
                return 0.0;
            }
            symbol_value(&KernelSymbol::new(kind, alpha, t).unwrap(), xi_sq).unwrap()
        })
        .collect()
}

#[test]
fn q_is_a_fractional_integral_of_p_in_time() {
    for (alpha, beta, xi_sq) in [(1.3, 0.8, 4.0), (1.6, 1.1, 0.5), (1.2, 0.3, 9.0)] {
        let err = |n: usize| {
            let grid = TimeGrid::new(1.0, n).unwrap();
            let p = time_profile(KernelKind::P, alpha, xi_sq, grid);
            let q = time_profile(KernelKind::Q { beta }, alpha, xi_sq, grid);
            let ip = frac_integral_values(&p, grid.dt(), alpha - beta).unwrap();
            let gap = |skip: usize| q.iter().zip(&ip).skip(skip).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (gap(0), gap(n / 8))
        };
        let ((coarse, _), (fine, interior)) = (err(256), err(2048));
        assert!(interior < 1e-3 && fine < coarse / 2.0, "alpha={alpha} beta={beta}: {coarse} -> {fine}, {interior}");
    }
}

#[test]
fn big_p_is_the_time_integral_of_p() {
    for (alpha, xi_sq) in [(1.2, 1.0), (1.5, 3.0), (1.9, 0.25)] {
        let err = |n: usize| {
            let grid = TimeGrid::new(2.0, n).unwrap();
            let p = time_profile(KernelKind::P, alpha, xi_sq, grid);
            let big = time_profile(KernelKind::BigP, alpha, xi_sq, grid);
            let ip = frac_integral_values(&p, grid.dt(), 1.0).unwrap();
            big.iter().zip(&ip).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(256), err(2048));
        assert!(fine < 1e-3 && fine < coarse / 2.0, "alpha={alpha}: {coarse} -> {fine}");
    }
}

#[test]
fn big_p_needs_alpha_above_one() {
    assert!(KernelSymbol::new(KernelKind::BigP, 0.9, 1.0).is_err());
    assert!(KernelSymbol::new(KernelKind::Q { beta: 1.0 }, 0.4, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernel_mass_is_the_zero_symbol(alpha in 0.3f64..1.9, t in 0.05f64..1.0, beta_frac in 0.0f64..1.0) {
        let beta = beta_frac * (alpha + 0.45);
        let grid = TorusGrid::new(1, 256, 40.0).unwrap();
        let sym = KernelSymbol::new(KernelKind::Q { beta }, alpha, t).unwrap();
        let k = kernel_field(&sym, &grid, f64::INFINITY).unwrap();
        let mass = t.powf(alpha - beta) * rgamma(1.0 + alpha - beta);
        prop_assert!((k.integral() - mass).abs() <= 1e-10 * (1.0 + mass.abs()));
    }

    #[test]
    fn kernels_are_even(alpha in 0.5f64..1.9, t in 0.1f64..1.0, d in 1usize..=2) {
        let grid = TorusGrid::new(d, 32, 12.0).unwrap();
        let sym = KernelSymbol::new(KernelKind::P, alpha, t).unwrap();
        let k = kernel_field(&sym, &grid, f64::INFINITY).unwrap();
        let n = grid.modes();
        let v = k.values();
        for i in 0..grid.len() {
            let [a, b, _] = grid.unravel(i);
            let j = if d == 1 { (n - a) % n } else { ((n - a) % n) * n + (n - b) % n };
            prop_assert!((v[i] - v[j]).abs() <= 1e-12 * (1.0 + k.max_abs()));
        }
    }

    #[test]
    fn table_path_agrees_with_direct_symbols(alpha in 0.2f64..1.9, t in 0.01f64..2.0, gamma in 0.0f64..2.0) {
        let sym = KernelSymbol::new(KernelKind::P, alpha, t).unwrap().with_gamma(gamma).unwrap();
        let xs: Vec<f64> = (0..40).map(|i| (i * i) as f64 * 0.37).collect();
        let tab = symbol_values(&sym, &xs).unwrap();
        for (x, v) in xs.iter().zip(&tab) {
            let d = symbol_value(&sym, *x).unwrap();
            prop_assert!((d - v).abs() <= 1e-10 * (1.0 + d.abs()), "{} vs {}", d, v);
        }
    }
}

use std::f64::consts::PI;

use fspde_core::lpnorms::*;
use fspde_core::torus::{Field, TorusGrid};
use proptest::prelude::*;

fn random_field(grid: TorusGrid, coeffs: &[(f64, f64)]) -> Field {
    Field::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let w = (k + 1) as f64 * 2.0 * PI / grid.period();
                a * (w * x[0]).cos() + b * (w * x[0]).sin()
            })
            .sum()
    })
}

#[test]
fn single_band_fields_have_a_single_term() {
    let grid = TorusGrid::new(1, 128, 2.0 * PI).unwrap();
    let part = DyadicPartition::build(&grid).unwrap();
    for j in 1..=5usize {
        let k = (1usize << j) as f64;
        let f = Field::from_fn(grid, |x| (k * x[0]).cos());
        for (s, p) in [(0.5, 2.0), (1.3, 3.0), (-0.4, 4.0)] {
            let b = norm(&f, &NormSpec::new(Space::Besov(s), p).unwrap(), &part).unwrap();
            let expected = 2f64.powf(s * j as f64) * f.lp_norm(p);
            assert!((b - expected).abs() <= 1e-12 * expected, "j={j} s={s}: {b} vs {expected}");
        }
    }
}

#[test]
fn p_below_two_is_rejected() {
    assert!(NormSpec::new(Space::Lp, 1.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn besov_norm_increases_with_smoothness(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
        s in -1.0f64..2.0,
        ds in 0.0f64..1.0,
        p in 2.0f64..5.0,
    ) {
        let grid = TorusGrid::new(1, 128, 2.0 * PI).unwrap();
        let part = DyadicPartition::build(&grid).unwrap();
        let f = random_field(grid, &coeffs);
        let lo = norm(&f, &NormSpec::new(Space::Besov(s), p).unwrap(), &part).unwrap();
        let hi = norm(&f, &NormSpec::new(Space::Besov(s + ds), p).unwrap(), &part).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn sobolev_norm_increases_with_smoothness_in_l2(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
        s in 0.0f64..2.0,
        ds in 0.0f64..1.0,
    ) {
        let grid = TorusGrid::new(1, 128, 2.0 * PI).unwrap();
        let part = DyadicPartition::build(&grid).unwrap();
        let f = random_field(grid, &coeffs);
        let lo = norm(&f, &NormSpec::new(Space::Sobolev(s), 2.0).unwrap(), &part).unwrap();
        let hi = norm(&f, &NormSpec::new(Space::Sobolev(s + ds), 2.0).unwrap(), &part).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn sobolev_embeds_into_besov(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
        s in 0.0f64..2.0,
        p in 2.0f64..6.0,
    ) {
        let grid = TorusGrid::new(1, 128, 2.0 * PI).unwrap();
        let part = DyadicPartition::build(&grid).unwrap();
        let f = random_field(grid, &coeffs);
        let b = norm(&f, &NormSpec::new(Space::Besov(s), p).unwrap(), &part).unwrap();
        let h = norm(&f, &NormSpec::new(Space::Sobolev(s), p).unwrap(), &part).unwrap();
        prop_assert!(b <= 8.0 * h, "B = {}, H = {}", b, h);
    }

    #[test]
    fn littlewood_paley_ratio_is_bounded(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
        gamma in 0.0f64..2.0,
        p in 2.0f64..6.0,
    ) {
        let grid = TorusGrid::new(1, 128, 2.0 * PI).unwrap();
        let part = DyadicPartition::build(&grid).unwrap();
        let r = check_equivalence(&random_field(grid, &coeffs), gamma, p, &part).unwrap();
        prop_assert!(r > 0.05 && r < 20.0, "{}", r);
    }
}

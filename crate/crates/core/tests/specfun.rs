use fspde_core::specfun::*;
use proptest::prelude::*;

fn params(a: f64, b: f64) -> MLParams {
    MLParams::new(a, b).unwrap()
}

#[test]
fn value_at_origin_is_reciprocal_gamma() {
    for (a, b) in [(0.3, 0.3), (0.5, 1.0), (1.0, 1.0), (1.5, 0.7), (1.9, 2.4)] {
        let v = ml(params(a, b), 0.0).unwrap();
        assert!((v - rgamma(b)).abs() <= 1e-14, "a={a} b={b}: {v}");
    }
}

#[test]
fn known_closed_forms() {
    // E_{2,1}(-z^2) = cos z, E_{1,2}(z) = (e^z - 1)/z
    for x in [0.1f64, 0.8, 1.7, 2.2] {
        let c = ml(params(2.0 - 1e-12, 1.0), -x * x).unwrap();
        assert!((c - x.cos()).abs() < 1e-8, "cos {x}: {c}");
    }
    for z in [-7.5f64, -2.0, -0.3] {
        let e = ml(params(1.0, 2.0), z).unwrap();
        assert!((e - (z.exp() - 1.0) / z).abs() < 1e-12, "{z}: {e}");
    }
}

#[test]
fn table_matches_direct_evaluation() {
    let p = params(0.7, 1.2);
    let t = shared_table(p, 60.0).unwrap();
    for i in 0..=300 {
        let v = 0.2 * i as f64;
        let direct = ml(p, -v).unwrap();
        assert!((t.eval(v) - direct).abs() <= 1e-11 * (1.0 + direct.abs()), "v={v}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recurrence_holds(a in 0.2f64..1.8, b in 0.2f64..1.5, v in 0.0f64..30.0) {
        let z = -v;
        let lhs = ml(params(a, b), z).unwrap();
        let rhs = z * ml(params(a, a + b), z).unwrap() + rgamma(b);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()), "a={} b={} z={}: {} vs {}", a, b, z, lhs, rhs);
    }

    #[test]
    fn completely_monotone_case_is_positive_and_decreasing(a in 0.1f64..1.0, v in 0.0f64..50.0) {
        let p = params(a, 1.0);
        let e0 = ml(p, -v).unwrap();
        let e1 = ml(p, -v - 0.5).unwrap();
        prop_assert!(e0 > 0.0 && e1 <= e0 + 1e-13);
    }

    #[test]
    fn series_and_integral_agree_inside_radius(a in 0.3f64..1.9, b in 0.3f64..1.2, s in 0.0f64..1.0) {
        prop_assume!(b < a + 1.0);
        let v = s * series_radius(a);
        let p = params(a, b);
        let ser = ml_series(p, -v, 1e-15).unwrap();
        let int = ml_integral(p, v).unwrap();
        prop_assert!((ser - int).abs() <= 1e-10 * (1.0 + ser.abs()), "{} vs {}", ser, int);
    }
}

//! One-dimensional quadrature: adaptive Gauss-Kronrod, tanh-sinh for
//! endpoint singularities, and Gauss-Legendre rules.

use crate::error::{Error, Result};

// Kronrod 15-point abscissae (descending) and weights, Gauss 7-point weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of one 15-point Kronrod panel.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let value = resk * half;
    let error = ((resk - resg) * half).abs();
    Panel { a, b, value, error }
}

/// Adaptive Gauss-Kronrod integration over `[a, b]` split at the given
/// interior breakpoints. Bisects the worst panel until the summed error
/// estimate falls below `abs_tol`.
pub fn integrate_gk<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> Result<(f64, f64)> {
    if breakpoints.len() < 2 {
        return Err(Error::Domain("quadrature needs at least two breakpoints".into()));
    }
    let mut panels: Vec<Panel> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if total_err <= abs_tol {
            break;
        }
        if panels.len() >= max_panels {
            let value: f64 = panels.iter().map(|p| p.value).sum();
            if !value.is_finite() {
                return Err(Error::Accuracy {
                    message: "non-finite quadrature value".into(),
                    achieved: f64::INFINITY,
                });
            }
            return Err(Error::Accuracy {
                message: format!("adaptive quadrature exhausted {max_panels} panels"),
                achieved: total_err,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty panel list");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel width at machine resolution; keep its estimate.
            panels.push(Panel { error: 0.0, ..p });
            continue;
        }
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
    }
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Ok((value, error))
}

/// Tanh-sinh quadrature on `[a, b]`; tolerates integrable algebraic
/// singularities at either endpoint. The integrand receives
/// `(x, distance_to_a, distance_to_b)` so that singular factors can be
/// evaluated without cancellation near the endpoints.
pub fn integrate_tanh_sinh<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<(f64, f64)> {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let pi2 = std::f64::consts::FRAC_PI_2;
    let tmax = 6.5;
    let eval = |t: f64| -> f64 {
        let s = pi2 * t.sinh();
        let cosh_s = s.cosh();
        let x = s.tanh();
        let w = pi2 * t.cosh() / (cosh_s * cosh_s);
        // 1 - x and 1 + x computed without cancellation.
        let e = (-2.0 * s.abs()).exp();
        let one_minus_abs = 2.0 * e / (1.0 + e);
        let (da, db) = if x < 0.0 {
            (half * one_minus_abs, half * (2.0 - one_minus_abs))
        } else {
            (half * (2.0 - one_minus_abs), half * one_minus_abs)
        };
        if da <= 0.0 || db <= 0.0 {
            return 0.0;
        }
        let v = f(center + half * x, da, db);
        if v.is_finite() {
            v * w
        } else {
            0.0
        }
    };
    let mut h = 1.0;
    let mut sum = 0.0;
    // Sum of |terms|: differences below its rounding level cannot shrink.
    let mut mass = 0.0;
    let add_node = |t: f64, sum: &mut f64, mass: &mut f64| {
        let v = eval(t);
        *sum += v;
        *mass += v.abs();
    };
    add_node(0.0, &mut sum, &mut mass);
    let mut k = 1;
    while k as f64 * h <= tmax {
        let t = k as f64 * h;
        add_node(t, &mut sum, &mut mass);
        add_node(-t, &mut sum, &mut mass);
        k += 1;
    }
    let mut estimate = sum * h * half;
    let mut err = f64::INFINITY;
    for level in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            add_node(t, &mut sum, &mut mass);
            add_node(-t, &mut sum, &mut mass);
            k += 2;
        }
        let next = sum * h * half;
        err = (next - estimate).abs();
        estimate = next;
        let floor = 64.0 * f64::EPSILON * mass * h * half.abs();
        if err <= abs_tol.max(floor) && level >= 2 {
            return Ok((estimate, err));
        }
    }
    Err(Error::Accuracy { message: "tanh-sinh refinement limit reached".into(), achieved: err })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Neumaier compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_and_exponential() {
        let (v, _) = integrate_gk(|x| x * x, &[0.0, 3.0], 1e-14, 100).unwrap();
        assert!((v - 9.0).abs() < 1e-13);
        let (v, _) = integrate_gk(|x| (-x).exp(), &[0.0, 1.0, 40.0], 1e-14, 500).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // \int_0^1 x^{-0.7} dx = 1/0.3
        let (v, _) = integrate_tanh_sinh(|_, da, _| da.powf(-0.7), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - 1.0 / 0.3).abs() < 1e-11, "{v}");
    }

    #[test]
    fn gauss_legendre_integrates_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::default();
        acc.add(1e16);
        acc.add(1.0);
        acc.add(-1e16);
        assert_eq!(acc.value(), 1.0);
    }
}

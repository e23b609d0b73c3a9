//! Two-parameter Mittag-Leffler function `E_{a,b}(z) = sum_k z^k / Gamma(a k + b)`
//! on the non-positive real axis.
//!
//! Small `|z|` uses the power series; larger `|z|` uses a real-line integral
//! representation whose integrand decays like `exp(-eta1 u)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gamma::{ln_gamma_abs, rgamma};
use crate::error::{Error, Result};
use crate::quad::{integrate_gk, integrate_tanh_sinh, CompensatedSum};

/// Maximum number of series terms in double precision.
pub const SERIES_TERM_CAP: usize = 600;

/// Upper bound on the series radius; the actual radius also shrinks with `a`.
pub const SERIES_RADIUS_MAX: f64 = 5.0;

/// Relative rounding budget a series evaluation must stay within.
const SERIES_ROUNDING_BUDGET: f64 = 1e-12;

/// Absolute tolerance for the integral representation.
const INTEGRAL_TOL: f64 = 1e-13;

/// Order and second parameter of `E_{a,b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLParams {
    pub a: f64,
    pub b: f64,
}

impl MLParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a < 2.0) {
            return Err(Error::Domain(format!("Mittag-Leffler order a = {a} must lie in (0, 2)")));
        }
        if !b.is_finite() {
            return Err(Error::Domain(format!("Mittag-Leffler parameter b = {b} is not finite")));
        }
        Ok(Self { a, b })
    }

    /// Whether the real-line integral representation is valid (`b < a + 1`).
    pub fn integral_admissible(&self) -> bool {
        self.b < self.a + 1.0
    }
}

/// Contour constants of the integral representation; functions of `a` only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLContour {
    pub eta: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

impl MLContour {
    /// Contour at the midpoint of the admissible angle interval
    /// `(a pi / 2, min(pi, a pi))`.
    pub fn midpoint(a: f64) -> Self {
        let lo = a * PI / 2.0;
        let hi = PI.min(a * PI);
        Self::with_angle(a, 0.5 * (lo + hi)).expect("midpoint is admissible")
    }

    /// Contour for an explicit angle `eta`.
    pub fn with_angle(a: f64, eta: f64) -> Result<Self> {
        let lo = a * PI / 2.0;
        let hi = PI.min(a * PI);
        if !(eta > lo && eta < hi) {
            return Err(Error::Domain(format!(
                "contour angle {eta} outside admissible interval ({lo}, {hi})"
            )));
        }
        Ok(Self { eta, eta1: -(eta / a).cos(), eta2: eta / a, eta3: eta.cos() })
    }
}

/// Evaluation route for [`ml_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MlMethod {
    Series,
    Integral,
    Auto,
}

impl std::fmt::Display for MlMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MlMethod::Series => "series",
            MlMethod::Integral => "integral",
            MlMethod::Auto => "auto",
        })
    }
}

/// Radius below which [`ml`] dispatches to the series. The maximal series
/// term grows like `exp(|z|^{1/a})`, so the radius shrinks for small `a`.
pub fn series_radius(a: f64) -> f64 {
    SERIES_RADIUS_MAX.min(6f64.powf(a))
}

/// `z^k / Gamma(a k + b)` without intermediate overflow.
#[inline]
pub(crate) fn series_term(a: f64, b: f64, z: f64, k: usize) -> f64 {
    let arg = a * k as f64 + b;
    let log_z = z.abs().ln();
    if arg < 160.0 && (k as f64) * log_z < 690.0 {
        return z.powi(k as i32) * rgamma(arg);
    }
    let gamma_sign = if arg > 0.0 {
        1.0
    } else {
        let rg = rgamma(arg);
        if rg == 0.0 {
            return 0.0;
        }
        rg.signum()
    };
    let sign = gamma_sign * if z < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
    sign * ((k as f64) * log_z - ln_gamma_abs(arg)).exp()
}

/// Power series with compensated summation. Stops once three consecutive
/// terms fall below `tol * |partial sum|` (and below rounding of the largest
/// term, so that a transient peak of the partial sums cannot stop it early).
pub fn ml_series(params: MLParams, z: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("series tolerance {tol} must be positive")));
    }
    let MLParams { a, b } = params;
    if z == 0.0 {
        return Ok(rgamma(b));
    }
    let mut acc = CompensatedSum::default();
    let mut max_term: f64 = 0.0;
    let mut small_run = 0;
    for k in 0..SERIES_TERM_CAP {
        let term = series_term(a, b, z, k);
        acc.add(term);
        max_term = max_term.max(term.abs());
        let partial = acc.value();
        let negligible = term.abs() <= tol * partial.abs() && term.abs() <= f64::EPSILON * max_term;
        if k > 0 && (negligible || (term == 0.0 && partial == 0.0)) {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 3 {
            let rounding = max_term * f64::EPSILON * 8.0;
            if rounding > SERIES_ROUNDING_BUDGET * (1.0 + partial.abs()) {
                return Err(Error::Accuracy {
                    message: format!(
                        "series for E_{{{a},{b}}}({z}) loses digits to cancellation; use the integral path"
                    ),
                    achieved: rounding,
                });
            }
            return Ok(partial);
        }
    }
    Err(Error::Accuracy {
        message: format!(
            "series for E_{{{a},{b}}}({z}) did not converge in {SERIES_TERM_CAP} terms; use the integral path"
        ),
        achieved: max_term,
    })
}

/// Integral representation of `E_{a,b}(-v)` for `v >= 0` and `b < a + 1`,
/// evaluated with the midpoint contour.
pub fn ml_integral(params: MLParams, v: f64) -> Result<f64> {
    ml_integral_with(params, v, MLContour::midpoint(params.a))
}

/// Integral representation with an explicit contour.
///
/// After the substitution `r = u^a` the integral reads
/// `(1/pi) int_0^inf u^{a-b} e^{-eta1 u} [u^a sin(psi - eta) + v sin psi]
///  / (u^{2a} + 2 u^a v eta3 + v^2) du` with `psi = u sin(eta2) + eta2 (a + 1 - b)`.
pub fn ml_integral_with(params: MLParams, v: f64, contour: MLContour) -> Result<f64> {
    let MLParams { a, b } = params;
    if !params.integral_admissible() {
        return Err(Error::Domain(format!(
            "integral representation requires b < a + 1 (a = {a}, b = {b})"
        )));
    }
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("integral path needs finite v >= 0, got {v}")));
    }
    if v == 0.0 {
        return Ok(rgamma(b));
    }
    let MLContour { eta, eta1, eta2, eta3 } = contour;
    let s2 = eta2.sin();
    let phase0 = eta2 * (a + 1.0 - b);
    let (sin_eta, cos_eta) = eta.sin_cos();
    let expo = a - b;
    let core = move |u: f64, u_pow_expo: f64| -> f64 {
        let ua = u.powf(a);
        let psi = s2 * u + phase0;
        let (sp, cp) = psi.sin_cos();
        let sin_shift = sp * cos_eta - cp * sin_eta;
        let num = ua * sin_shift + v * sp;
        let den = ua * ua + 2.0 * ua * v * eta3 + v * v;
        u_pow_expo * (-eta1 * u).exp() * num / den
    };
    let cutoff = 37.0 / eta1;
    let u_peak = v.powf(1.0 / a);
    let u0 = (0.5 * u_peak).min(1.0).min(0.5 * cutoff);

    // Panel [0, u0] carries the algebraic endpoint factor u^{a-b}; its value
    // at u = 0 is integrated in closed form, so that exponents close to -1
    // leave only the milder u^{2a-b} singularity to the quadrature.
    let g0 = phase0.sin() / v;
    let (rest, _) =
        integrate_tanh_sinh(|_, da, _| da.powf(expo) * (core(da, 1.0) - g0), 0.0, u0, INTEGRAL_TOL * 0.1)?;
    let head = rest + g0 * u0.powf(expo + 1.0) / (expo + 1.0);

    let mut breaks = vec![u0];
    let mut x = u0;
    while 2.0 * x < cutoff {
        x *= 2.0;
        breaks.push(x);
    }
    if u_peak > u0 && u_peak < cutoff {
        breaks.push(u_peak);
    }
    breaks.push(cutoff);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let (tail, _) = integrate_gk(|u| core(u, u.powf(expo)), &breaks, INTEGRAL_TOL, 20_000)?;
    Ok((head + tail) / PI)
}

/// `E_{a,b}(z)` for `z <= 0`, dispatching between series and integral paths.
pub fn ml(params: MLParams, z: f64) -> Result<f64> {
    ml_with(params, z, MlMethod::Auto).map(|(v, _)| v)
}

/// Like [`ml`] but with an explicit method; returns the value and the path used.
pub fn ml_with(params: MLParams, z: f64, method: MlMethod) -> Result<(f64, MlMethod)> {
    if z > 0.0 {
        return Err(Error::Domain(format!(
            "positive argument z = {z} is not supported; kernels only need E(-v)"
        )));
    }
    if z.is_nan() {
        return Err(Error::Domain("argument is NaN".into()));
    }
    if z == 0.0 {
        return Ok((rgamma(params.b), MlMethod::Series));
    }
    match method {
        MlMethod::Series => ml_series(params, z, 1e-16).map(|v| (v, MlMethod::Series)),
        MlMethod::Integral => integral_shifted(params, -z).map(|v| (v, MlMethod::Integral)),
        MlMethod::Auto => {
            if z.abs() <= series_radius(params.a) {
                if let Ok(v) = ml_series(params, z, 1e-16) {
                    return Ok((v, MlMethod::Series));
                }
            }
            integral_shifted(params, -z).map(|v| (v, MlMethod::Integral))
        }
    }
}

/// Integral path extended to `b >= a + 1` through the recurrence
/// `E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z`.
fn integral_shifted(params: MLParams, v: f64) -> Result<f64> {
    if params.integral_admissible() {
        return ml_integral(params, v);
    }
    let lower = MLParams { a: params.a, b: params.b - params.a };
    let inner = integral_shifted(lower, v)?;
    Ok((inner - rgamma(lower.b)) / (-v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> MLParams {
        MLParams::new(a, b).unwrap()
    }

    #[test]
    fn series_examples() {
        assert_eq!(ml_series(p(0.7, 1.0), 0.0, 1e-16).unwrap(), 1.0);
        let e1 = ml_series(p(1.0, 1.0), -1.0, 1e-16).unwrap();
        assert!((e1 - (-1f64).exp()).abs() < 1e-15);
        // E_{1,2}(z) = (e^z - 1)/z
        let e12 = ml_series(p(1.0, 2.0), -1.0, 1e-16).unwrap();
        assert!((e12 - (1.0 - (-1f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn integral_examples() {
        // E_{1/2,1}(-1) = e * erfc(1)
        let v = ml_integral(p(0.5, 1.0), 1.0).unwrap();
        assert!((v - 0.427_583_576_155_807).abs() < 1e-11, "{v}");
        assert_eq!(ml_integral(p(1.5, 1.0), 0.0).unwrap(), 1.0);
        let v = ml_integral(p(1.0, 1.0), 3.0).unwrap();
        assert!((v - (-3f64).exp()).abs() < 1e-12, "{v}");
    }

    #[test]
    fn integral_rejects_large_b() {
        let err = ml_integral(p(0.5, 1.5), 1.0).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn dispatch_examples() {
        assert_eq!(ml(p(0.8, 1.0), 0.0).unwrap(), 1.0);
        assert!((ml(p(1.0, 1.0), -0.5).unwrap() - 0.606_530_659_712_633_4).abs() < 1e-12);
        assert!(ml(p(0.8, 1.0), 0.5).is_err());
    }

    #[test]
    fn series_reports_cancellation() {
        let err = ml_series(p(0.3, 1.0), -5.0, 1e-16).unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }), "{err}");
    }

    #[test]
    fn contour_constants_are_admissible() {
        for a in [0.1, 0.5, 0.99, 1.0, 1.5, 1.95] {
            let c = MLContour::midpoint(a);
            assert!(c.eta1 > 0.0, "a = {a}");
            assert!(c.eta3 > -1.0 && c.eta3 < 1.0);
        }
        assert!(MLContour::with_angle(0.5, 0.1).is_err());
    }

    #[test]
    fn shifted_integral_handles_b_above_a_plus_one() {
        let pr = p(0.5, 1.7);
        let direct = ml_series(pr, -1.5, 1e-16).unwrap();
        let (via_int, m) = ml_with(pr, -1.5, MlMethod::Integral).unwrap();
        assert_eq!(m, MlMethod::Integral);
        assert!((direct - via_int).abs() < 1e-10, "{direct} vs {via_int}");
    }
}

//! Equation parameters, their admissibility conditions and derived exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default small shift used at the borderline `beta1 = 1/2`, `beta2 = 1/p`.
pub const DEFAULT_KAPPA: f64 = 0.01;

const BORDER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub p: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

impl ProblemParams {
    pub fn new(alpha: f64, beta1: f64, beta2: f64, p: f64) -> Result<Self> {
        Self { alpha, beta1, beta2, p, gamma: 0.0, kappa: DEFAULT_KAPPA }.validated()
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validated()
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = kappa;
        self.validated()
    }

    /// Checks every admissibility condition and names the first violated one.
    pub fn validated(self) -> Result<Self> {
        let ProblemParams { alpha, beta1, beta2, p, gamma, kappa } = self;
        let finite = [alpha, beta1, beta2, p, gamma, kappa].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Parameter("parameters must be finite numbers".into()));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::Parameter(format!("violated: alpha in (0, 2) (alpha = {alpha})")));
        }
        if !(p >= 2.0) {
            return Err(Error::Parameter(format!("violated: p >= 2 (p = {p})")));
        }
        if !(beta1 < alpha + 0.5) {
            return Err(Error::Parameter(format!(
                "violated: beta1 < alpha + 1/2 (beta1 = {beta1}, alpha + 1/2 = {})",
                alpha + 0.5
            )));
        }
        if !(beta2 < alpha + 1.0 / p) {
            return Err(Error::Parameter(format!(
                "violated: beta2 < alpha + 1/p (beta2 = {beta2}, alpha + 1/p = {})",
                alpha + 1.0 / p
            )));
        }
        if !(kappa > 0.0) {
            return Err(Error::Parameter(format!("violated: kappa > 0 (kappa = {kappa})")));
        }
        Ok(self)
    }

    /// `(2 beta2 - 2/p)^+`.
    pub fn jump_excess(&self) -> f64 {
        (2.0 * self.beta2 - 2.0 / self.p).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedExponents {
    pub c0: f64,
    pub c0_bar: f64,
    pub theta: f64,
    pub d0: f64,
    /// Smoothness of the space of `u(0)`, relative to `gamma`.
    pub u0_order: f64,
    /// Smoothness of the space of `u_t(0)`; present only for `alpha > 1`.
    pub v0_order: Option<f64>,
}

fn shifted_exponent(beta: f64, border: f64, alpha: f64, kappa: f64) -> f64 {
    if (beta - border).abs() <= BORDER_TOL {
        kappa
    } else if beta > border {
        (2.0 * beta - 2.0 * border) / alpha
    } else {
        0.0
    }
}

pub fn derived_exponents(params: &ProblemParams) -> Result<DerivedExponents> {
    let ps = params.validated()?;
    let ProblemParams { alpha, beta1, beta2, p, gamma, kappa } = ps;
    let c0 = shifted_exponent(beta1, 0.5, alpha, kappa);
    let c0_bar = shifted_exponent(beta2, 1.0 / p, alpha, kappa);
    let theta = alpha.min(2.0 * (alpha - beta1) + 1.0).min(p * (alpha - beta2) + 2.0);
    let d0 = 4.0 - 2.0 * ps.jump_excess() / alpha;
    let u0_order = gamma + (2.0 - 2.0 / (alpha * p)).max(0.0);
    let v0_order = (alpha > 1.0).then(|| {
        if alpha > 1.0 + 1.0 / p {
            gamma + 2.0 - 2.0 / alpha - 2.0 / (alpha * p)
        } else {
            gamma + 2.0 - 2.0 / alpha
        }
    });
    Ok(DerivedExponents { c0, c0_bar, theta, d0, u0_order, v0_order })
}

/// Outcome of the space-time white noise admissibility check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateAudit {
    pub d: usize,
    pub d0: f64,
    pub kappa0_low: f64,
    pub kappa0_high: f64,
    pub kappa0: f64,
}

/// Accepts `d < d0` and picks `kappa0` at the midpoint of
/// `(d/2, (2 - (2 beta2 - 2/p)^+/alpha) ∧ d)`.
pub fn dimension_gate(params: &ProblemParams, d: usize) -> Result<GateAudit> {
    let ps = params.validated()?;
    let d0 = derived_exponents(&ps)?.d0;
    let df = d as f64;
    if !(df < d0) {
        return Err(Error::Parameter(format!(
            "dimension gate: d = {d} is not below d0 = {d0} = 4 - 2(2 beta2 - 2/p)^+/alpha"
        )));
    }
    let lo = 0.5 * df;
    let hi = (2.0 - ps.jump_excess() / ps.alpha).min(df);
    if !(lo < hi) {
        return Err(Error::Parameter(format!("empty kappa0 interval ({lo}, {hi})")));
    }
    Ok(GateAudit { d, d0, kappa0_low: lo, kappa0_high: hi, kappa0: 0.5 * (lo + hi) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_examples() {
        let e = derived_exponents(&ProblemParams::new(1.0, 1.0, 1.0, 2.0).unwrap()).unwrap();
        assert_eq!((e.c0, e.c0_bar, e.theta, e.d0), (1.0, 1.0, 1.0, 2.0));
        let e = derived_exponents(&ProblemParams::new(0.8, 0.3, 0.2, 3.0).unwrap()).unwrap();
        assert_eq!((e.c0, e.c0_bar), (0.0, 0.0));
        let e = derived_exponents(&ProblemParams::new(0.8, 0.5, 0.2, 3.0).unwrap()).unwrap();
        assert_eq!(e.c0, DEFAULT_KAPPA);
        assert!(e.v0_order.is_none());
        let e = derived_exponents(&ProblemParams::new(1.5, 1.2, 1.3, 4.0).unwrap()).unwrap();
        assert!((e.v0_order.unwrap() - (2.0 - 2.0 / 1.5 - 2.0 / 6.0)).abs() < 1e-15);
        assert!(e.c0 < 2.0 && e.c0_bar < 2.0);
    }

    #[test]
    fn violations_are_named() {
        let msg = ProblemParams::new(1.0, 0.5, 1.0 + 0.5 + 0.1, 2.0).unwrap_err().to_string();
        assert!(msg.contains("beta2 < alpha + 1/p"), "{msg}");
        let msg = ProblemParams::new(1.0, 1.6, 0.5, 2.0).unwrap_err().to_string();
        assert!(msg.contains("beta1 < alpha + 1/2"), "{msg}");
        assert!(ProblemParams::new(2.0, 0.5, 0.5, 2.0).is_err());
        assert!(ProblemParams::new(1.0, 0.5, 0.5, 1.5).is_err());
    }

    #[test]
    fn gate_examples() {
        let ps = ProblemParams::new(1.0, 0.5, 1.0, 2.0).unwrap();
        assert!(dimension_gate(&ps, 1).is_ok());
        let msg = dimension_gate(&ps, 2).unwrap_err().to_string();
        assert!(msg.contains("d0 = 2"), "{msg}");
        let small = ProblemParams::new(1.2, 0.5, 1.2 / 4.0 + 0.5 - 0.01, 2.0).unwrap();
        for d in 1..=3 {
            assert!(dimension_gate(&small, d).is_ok());
        }
        let low = ProblemParams::new(0.7, 0.5, 0.3, 3.0).unwrap();
        let a = dimension_gate(&low, 3).unwrap();
        assert_eq!((a.d0, a.kappa0_low, a.kappa0_high), (4.0, 1.5, 2.0));
    }
}

//! Scaling test for the critical exponent `c0 = (2 beta1 - 1)/alpha`.
//!
//! For each scale `c` the Wiener-driven problem is solved on the torus of
//! period `L/c` up to `c^{-2/alpha} T` with increments `c^{-1/alpha} dW` and
//! data `c^{2 - (2 beta1 - 1)/alpha} g(c^{2/alpha} t, c x)`, so that
//! `u_c(t, x) = u(c^{2/alpha} t, c x)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{fit_slope, to_value, Report, Verdict};
use crate::error::{Error, Result};
use crate::fraccalc::TimeGrid;
use crate::kernels::{spectral_multiplier, Multiplier};
use crate::levy::sample_wiener;
use crate::params::{derived_exponents, ProblemParams};
use crate::solver::{solve_linear, Noise, ProblemData, SpaceTimeFn};
use crate::torus::{Field, TorusGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub params: ProblemParams,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_l")]
    pub l: f64,
    #[serde(default = "default_t")]
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    /// Offsets of the tested exponents from `c0`.
    #[serde(default = "default_offsets")]
    pub offsets: Vec<f64>,
    #[serde(default = "default_flat")]
    pub flat_tol: f64,
    #[serde(default = "default_steep")]
    pub steep_min: f64,
}

fn default_n() -> usize {
    64
}
fn default_steps() -> usize {
    64
}
fn default_l() -> f64 {
    2.0 * PI
}
fn default_t() -> f64 {
    1.0
}
fn default_samples() -> usize {
    8
}
fn default_scales() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0, 4.0]
}
fn default_offsets() -> Vec<f64> {
    vec![-0.3, 0.0, 0.3]
}
fn default_flat() -> f64 {
    0.05
}
fn default_steep() -> f64 {
    0.2
}

impl ScalingConfig {
    pub fn new(params: ProblemParams) -> Self {
        Self {
            params,
            n: default_n(),
            steps: default_steps(),
            l: default_l(),
            t_max: default_t(),
            samples: default_samples(),
            seed: 0,
            scales: default_scales(),
            offsets: default_offsets(),
            flat_tol: default_flat(),
            steep_min: default_steep(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSlope {
    pub exponent: f64,
    pub offset: f64,
    /// `ln R(c; e)` for each scale.
    pub log_ratios: Vec<f64>,
    pub slope: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub c0: f64,
    pub scales: Vec<f64>,
    pub slopes: Vec<ExponentSlope>,
}

impl ScalingReport {
    pub fn passed(&self) -> bool {
        self.slopes.iter().all(|s| s.pass)
    }

    pub fn to_report(&self, cfg: &ScalingConfig) -> Report {
        let mut fitted = BTreeMap::new();
        fitted.insert("c0".to_string(), self.c0);
        for s in &self.slopes {
            fitted.insert(format!("slope[e=c0{:+.3}]", s.offset), s.slope);
        }
        let ratios_by_level = self
            .scales
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let per: BTreeMap<String, f64> =
                    self.slopes.iter().map(|s| (format!("e=c0{:+.3}", s.offset), s.log_ratios[i].exp())).collect();
                json!({"scale": c, "ratios": per})
            })
            .collect();
        Report {
            claim: "scaling".into(),
            params: to_value(cfg),
            fitted_constants: fitted,
            violations: self.slopes.iter().filter(|s| !s.pass).count(),
            ratios_by_level,
            verdict: Verdict::from_bool(self.passed()),
        }
    }
}

/// Base noise coefficient `g(t, x)` on the unit-scale torus.
fn base_g(l: f64, t_max: f64) -> impl Fn(f64, f64) -> f64 + Send + Sync + Clone {
    let w = 2.0 * PI / l;
    move |t, x| (1.0 + 0.5 * (2.0 * PI * t / t_max).sin()) * ((w * x).cos() + 0.5 * (3.0 * w * x).sin())
}

pub fn verify_scaling_criticality(cfg: &ScalingConfig) -> Result<ScalingReport> {
    let ps = cfg.params.validated()?;
    if !(ps.beta1 > 0.5) {
        return Err(Error::Parameter(format!("scaling test needs beta1 > 1/2 (beta1 = {})", ps.beta1)));
    }
    if cfg.scales.len() < 2 || cfg.samples == 0 {
        return Err(Error::Parameter("need at least two scales and one sample".into()));
    }
    let c0 = derived_exponents(&ps)?.c0;
    let (a, p) = (ps.alpha, ps.p);
    let base_time = TimeGrid::new(cfg.t_max, cfg.steps)?;
    let g0 = base_g(cfg.l, cfg.t_max);
    // per scale: (E int |Delta u_c|^p, [int |(-Delta)^{e/2} g_c|^p per exponent])
    let per_scale: Vec<(f64, Vec<f64>)> = cfg
        .scales
        .par_iter()
        .map(|&c| {
            if !(c > 0.0) {
                return Err(Error::Parameter(format!("scale {c} must be positive")));
            }
            let grid = TorusGrid::new(1, cfg.n, cfg.l / c)?;
            let time = TimeGrid::new(c.powf(-2.0 / a) * cfg.t_max, cfg.steps)?;
            let amp = c.powf(2.0 - (2.0 * ps.beta1 - 1.0) / a);
            let tc = c.powf(2.0 / a);
            let gf = g0.clone();
            let g: SpaceTimeFn = Arc::new(move |t| Field::from_fn(grid, |x| amp * gf(tc * t, c * x[0])));
            let data = ProblemData { u0: Field::zeros(grid), v0: None, f: None, g: vec![g.clone()], h: Vec::new() };
            let mut lhs = 0.0;
            for s in 0..cfg.samples {
                let base = sample_wiener(base_time, 1, cfg.seed.wrapping_add(s as u64));
                let w = base.scaled(c.powf(-1.0 / a), time)?;
                let noise = Noise { wiener: Some(w), jumps: Vec::new(), seed: None };
                let sol = solve_linear(&data, &ps, &grid, time, &noise)?;
                let pow: Vec<f64> = sol
                    .values
                    .iter()
                    .map(|u| spectral_multiplier(u, Multiplier::FracLaplacian(2.0)).lp_norm_pow(p))
                    .collect();
                lhs += trapezoid(&sol.times, &pow);
            }
            lhs /= cfg.samples as f64;
            let nodes = time.nodes();
            let rhs = cfg
                .offsets
                .iter()
                .map(|off| {
                    let m = Multiplier::FracLaplacian(c0 + off);
                    let pow: Vec<f64> = nodes.iter().map(|&t| spectral_multiplier(&g(t), m).lp_norm_pow(p)).collect();
                    trapezoid(&nodes, &pow)
                })
                .collect();
            Ok((lhs, rhs))
        })
        .collect::<Result<_>>()?;
    let log_c: Vec<f64> = cfg.scales.iter().map(|c| c.ln()).collect();
    let slopes = cfg
        .offsets
        .iter()
        .enumerate()
        .map(|(k, &off)| {
            let log_ratios: Vec<f64> =
                per_scale.iter().map(|(l, r)| (l.powf(1.0 / p) / r[k].powf(1.0 / p)).ln()).collect();
            let slope = fit_slope(&log_c, &log_ratios);
            let pass = if off == 0.0 { slope.abs() <= cfg.flat_tol } else { slope.abs() >= cfg.steep_min };
            ExponentSlope { exponent: c0 + off, offset: off, log_ratios, slope, pass }
        })
        .collect();
    Ok(ScalingReport { c0, scales: cfg.scales.clone(), slopes })
}

fn trapezoid(times: &[f64], v: &[f64]) -> f64 {
    (0..times.len() - 1).map(|i| 0.5 * (times[i + 1] - times[i]) * (v[i] + v[i + 1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_exponent_is_flat() {
        let ps = ProblemParams::new(1.0, 1.0, 0.5, 2.0).unwrap();
        let mut cfg = ScalingConfig::new(ps);
        cfg.n = 16;
        cfg.steps = 16;
        cfg.samples = 2;
        let r = verify_scaling_criticality(&cfg).unwrap();
        assert!(r.passed(), "{r:?}");
        let up = r.slopes.iter().find(|s| s.offset > 0.0).unwrap();
        assert!((up.slope + 0.3).abs() < 1e-6, "{}", up.slope);
        // c = 1 anchors every exponent at the unscaled problem
        let i1 = cfg.scales.iter().position(|&c| c == 1.0).unwrap();
        assert!(r.slopes.iter().all(|s| s.log_ratios[i1].is_finite()));
    }

    #[test]
    fn subcritical_beta1_is_rejected() {
        let ps = ProblemParams::new(1.0, 0.4, 0.5, 2.0).unwrap();
        assert!(verify_scaling_criticality(&ScalingConfig::new(ps)).is_err());
    }
}

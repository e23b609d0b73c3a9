//! Time-weighted a priori bound
//! `||u||^p(t) <= C int_0^t (t-s)^{theta-1} (||f||^p + ||g||^p + ||h||^p)(s) ds + C (E||u0||^p + E||v0||^p)`,
//! checked with `f` replaced by `Delta u + f` so that the solved equation has
//! the form of the bound.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::maxreg::study_forcing;
use super::report::{to_value, Report, Verdict};
use crate::error::{Error, Result};
use crate::fraccalc::{frac_integral_values, TimeGrid};
use crate::kernels::{spectral_multiplier, Multiplier};
use crate::levy::{sample_jump_path, sample_wiener, JumpLaw, LevySpec};
use crate::params::{derived_exponents, ProblemParams};
use crate::solver::{solve_linear, Noise, ProblemData};
use crate::specfun::gamma_fn;
use crate::torus::{Field, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GronwallCase {
    Zero,
    Forcing,
    Initial,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallConfig {
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
    #[serde(default = "default_levy")]
    pub levy: LevySpec,
    #[serde(default = "default_cases")]
    pub cases: Vec<GronwallCase>,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_n() -> usize {
    32
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
    20
}
fn default_levy() -> LevySpec {
    LevySpec { lambda: 4.0, law: JumpLaw::TwoPoint, sigma: 1.0, d1: 1, copies: 1 }
}
fn default_cases() -> Vec<GronwallCase> {
    vec![GronwallCase::Zero, GronwallCase::Forcing, GronwallCase::Initial, GronwallCase::Full]
}
fn default_margin() -> f64 {
    2.0
}

impl GronwallConfig {
    pub fn new(params: ProblemParams) -> Self {
        Self {
            params,
            n: default_n(),
            steps: default_steps(),
            l: default_l(),
            t_max: default_t(),
            samples: default_samples(),
            seed: 0,
            levy: default_levy(),
            cases: default_cases(),
            margin: default_margin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallPoint {
    pub case: GronwallCase,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub calibration: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub theta: f64,
    pub constant: f64,
    pub violations: usize,
    pub points: Vec<GronwallPoint>,
}

impl GronwallReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.constant.is_finite()
    }

    pub fn to_report(&self, cfg: &GronwallConfig) -> Report {
        let mut fitted = BTreeMap::new();
        fitted.insert("C".to_string(), self.constant);
        fitted.insert("theta".to_string(), self.theta);
        let mut by_case: BTreeMap<GronwallCase, f64> = BTreeMap::new();
        for p in &self.points {
            let r = if p.rhs > 0.0 { p.lhs / p.rhs } else { 0.0 };
            let e = by_case.entry(p.case).or_insert(0.0);
            *e = e.max(r);
        }
        Report {
            claim: "gronwall".into(),
            params: to_value(cfg),
            fitted_constants: fitted,
            violations: self.violations,
            ratios_by_level: by_case.into_iter().map(|(c, r)| json!({"case": c, "max_ratio": r})).collect(),
            verdict: Verdict::from_bool(self.passed()),
        }
    }
}

fn cumulative(times: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; times.len()];
    for i in 1..times.len() {
        out[i] = out[i - 1] + 0.5 * (times[i] - times[i - 1]) * (v[i] + v[i - 1]);
    }
    out
}

/// Left and right sides on the uniform nodes `t_1..t_n` for one case.
fn case_sides(cfg: &GronwallConfig, ps: &ProblemParams, theta: f64, case: GronwallCase) -> Result<Vec<(f64, f64, f64)>> {
    let grid = TorusGrid::new(1, cfg.n, cfg.l)?;
    let time = TimeGrid::new(cfg.t_max, cfg.steps)?;
    let p = ps.p;
    let bessel = Multiplier::Bessel(ps.gamma);
    let (f, g, h) = study_forcing(grid, cfg.t_max);
    let w = 2.0 * PI / cfg.l;
    let mut data = ProblemData::initial(Field::zeros(grid));
    match case {
        GronwallCase::Zero => {}
        GronwallCase::Forcing => data.f = Some(Arc::new(move |_| Field::from_fn(grid, |_| 1.0))),
        GronwallCase::Initial => {
            data.u0 = Field::from_fn(grid, |x| (w * x[0]).cos() + 0.3 * (4.0 * w * x[0]).sin());
            data.v0 = Some(Field::from_fn(grid, |x| 0.5 * (2.0 * w * x[0]).sin()));
        }
        GronwallCase::Full => {
            data.u0 = Field::from_fn(grid, |x| 0.5 * (w * x[0]).sin());
            data.f = Some(f);
            data.g = vec![g];
            data.h = vec![vec![h; cfg.levy.d1]];
        }
    }
    let nodes = time.nodes();
    let samples = if data.g.is_empty() && data.h.is_empty() { 1 } else { cfg.samples };
    let per_sample: Vec<(Vec<f64>, Vec<f64>)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let seed = cfg.seed.wrapping_add(s as u64);
            let noise = Noise {
                wiener: (!data.g.is_empty()).then(|| sample_wiener(time, 1, seed)),
                jumps: if data.h.is_empty() { Vec::new() } else { vec![sample_jump_path(&cfg.levy, cfg.t_max, seed, 0)?] },
                seed: Some(seed),
            };
            let sol = solve_linear(&data, ps, &grid, time, &noise)?;
            let mut u_pow = Vec::with_capacity(sol.times.len());
            let mut src_pow = Vec::with_capacity(sol.times.len());
            for (t, u) in sol.times.iter().zip(&sol.values) {
                u_pow.push(spectral_multiplier(u, bessel).lp_norm_pow(p));
                let mut ftot = spectral_multiplier(u, Multiplier::FracLaplacian(2.0)).scaled(-1.0);
                if let Some(f) = &data.f {
                    ftot.axpy(1.0, &f(*t))?;
                }
                let mut s = spectral_multiplier(&ftot, bessel).lp_norm_pow(p);
                for gk in &data.g {
                    s += spectral_multiplier(&gk(*t), bessel).lp_norm_pow(p);
                }
                for hk in &data.h {
                    for hr in hk {
                        s += spectral_multiplier(&hr(*t), bessel).lp_norm_pow(p);
                    }
                }
                src_pow.push(s);
            }
            let lhs = cumulative(&sol.times, &u_pow);
            let b = cumulative(&sol.times, &src_pow);
            let pick = |v: &[f64]| -> Vec<f64> {
                nodes.iter().map(|t| v[sol.index_of(*t).expect("uniform node present")]).collect()
            };
            Ok((pick(&lhs), pick(&b)))
        })
        .collect::<Result<_>>()?;
    let mut lhs = vec![0.0; nodes.len()];
    let mut b = vec![0.0; nodes.len()];
    for (l, s) in &per_sample {
        for i in 0..nodes.len() {
            lhs[i] += l[i] / samples as f64;
            b[i] += s[i] / samples as f64;
        }
    }
    let init = spectral_multiplier(&data.u0, bessel).lp_norm_pow(p)
        + if ps.alpha > 1.0 { data.v0.as_ref().map_or(0.0, |v| spectral_multiplier(v, bessel).lp_norm_pow(p)) } else { 0.0 };
    // int_0^t (t - s)^{theta-1} B(s) ds = Gamma(theta) I^theta B
    let weighted = frac_integral_values(&b, time.dt(), theta)?;
    let gt = gamma_fn(theta)?;
    Ok((1..nodes.len()).map(|i| (nodes[i], lhs[i], gt * weighted[i] + init)).collect())
}

pub fn verify_gronwall(cfg: &GronwallConfig) -> Result<GronwallReport> {
    let ps = cfg.params.validated()?;
    let theta = derived_exponents(&ps)?.theta;
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!("theta = {theta} must be positive")));
    }
    let mut points = Vec::new();
    for &case in &cfg.cases {
        for (i, (t, lhs, rhs)) in case_sides(cfg, &ps, theta, case)?.into_iter().enumerate() {
            points.push(GronwallPoint { case, t, lhs, rhs, calibration: i % 2 == 0 });
        }
    }
    let ratio = |p: &GronwallPoint| if p.rhs > 0.0 { p.lhs / p.rhs } else if p.lhs > 0.0 { f64::INFINITY } else { 0.0 };
    let constant = cfg.margin * points.iter().filter(|p| p.calibration).map(ratio).fold(0.0, f64::max);
    let violations = points.iter().filter(|p| !p.calibration && p.lhs > constant * p.rhs).count();
    Ok(GronwallReport { theta, constant, violations, points })
}

//! Space-time convolution estimates against Besov norms of the data,
//! checked as mesh-stable ratios over random test functions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::envelopes::{Envelope, EnvelopeConfig, EnvelopeKind};
use super::report::{to_value, Report, Verdict};
use crate::error::{Error, Result};
use crate::kernels::{symbol_values, KernelKind, KernelSymbol};
use crate::levy::stream_rng;
use crate::lpnorms::{besov_from_bands, DyadicPartition};
use crate::quad::gauss_legendre;
use crate::torus::{Field, TorusGrid};

/// Which convolution estimate is studied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvolutionKind {
    /// `(-Delta)^{(c1+eps)/2} q_{alpha,beta}(t-s) * g(s)` against `B^eps_p` in space-time.
    #[serde(rename = "q")]
    Q,
    /// `p(t) * f` against `B^{-2/(alpha p)}_p`.
    #[serde(rename = "p")]
    P,
    /// `P(t) * h` against `B^{-2/(alpha p) - 2/alpha}_p` or `B^{-2/alpha}_p`.
    #[serde(rename = "P")]
    BigP,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshLevel {
    pub n: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovConfig {
    pub kind: ConvolutionKind,
    pub alpha: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_levels")]
    pub levels: Vec<MeshLevel>,
    #[serde(default = "default_l")]
    pub l: f64,
    #[serde(default = "default_t")]
    pub t_max: f64,
    /// Amplitude of mode `m` is `(1 + |m|)^{-decay}` times a normal draw.
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_growth")]
    pub growth_limit: f64,
}

fn default_p() -> f64 {
    2.0
}
fn default_samples() -> usize {
    50
}
fn default_levels() -> Vec<MeshLevel> {
    vec![MeshLevel { n: 64, steps: 64 }, MeshLevel { n: 128, steps: 128 }]
}
fn default_l() -> f64 {
    2.0 * PI
}
fn default_t() -> f64 {
    1.0
}
fn default_decay() -> f64 {
    1.0
}
fn default_growth() -> f64 {
    1.25
}

impl BesovConfig {
    pub fn new(kind: ConvolutionKind, alpha: f64) -> Self {
        Self {
            kind,
            alpha,
            beta: None,
            p: default_p(),
            epsilon: None,
            delta: None,
            samples: default_samples(),
            levels: default_levels(),
            l: default_l(),
            t_max: default_t(),
            decay: default_decay(),
            seed: 0,
            growth_limit: default_growth(),
        }
    }

    fn envelope(&self) -> Result<Envelope> {
        let kind = match self.kind {
            ConvolutionKind::Q => EnvelopeKind::Q,
            ConvolutionKind::P => EnvelopeKind::P,
            ConvolutionKind::BigP => EnvelopeKind::BigP,
        };
        let mut cfg = EnvelopeConfig::new(kind, self.alpha);
        cfg.beta = self.beta;
        cfg.p = self.p;
        cfg.epsilon = self.epsilon;
        cfg.delta = self.delta;
        Envelope::from_config(&cfg)
    }

    /// Besov index of the right-hand side.
    pub fn besov_index(&self) -> Result<f64> {
        let env = self.envelope()?;
        let (a, p) = (self.alpha, self.p);
        Ok(match self.kind {
            ConvolutionKind::Q => env.epsilon,
            ConvolutionKind::P => -2.0 / (a * p),
            ConvolutionKind::BigP => {
                if a > 1.0 + 1.0 / p {
                    -2.0 / (a * p) - 2.0 / a
                } else {
                    -2.0 / a
                }
            }
        })
    }
}

/// Test function `g(s, x) = a(s) G(x)`; `a = 1` for the time-independent estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    /// `(cos, sin)` amplitudes of modes `0, 1, ...`.
    pub modes: Vec<(f64, f64)>,
    pub omega: f64,
    pub phase: f64,
}

impl TestFunction {
    /// Draws the first `count` modes; the draws for a mode do not depend on
    /// `count`, so refinements extend coarser test functions.
    pub fn random(seed: u64, sample: usize, count: usize, decay: f64) -> Self {
        let mut rng = stream_rng(seed, sample as u64);
        let omega = 2.0 * PI * rand::Rng::random::<f64>(&mut rng);
        let phase = 2.0 * PI * rand::Rng::random::<f64>(&mut rng);
        let modes = (0..count)
            .map(|m| {
                let amp = (1.0 + m as f64).powf(-decay);
                let c: f64 = StandardNormal.sample(&mut rng);
                let s: f64 = StandardNormal.sample(&mut rng);
                (amp * c, if m == 0 { 0.0 } else { amp * s })
            })
            .collect();
        Self { modes, omega, phase }
    }

    pub fn space(&self, grid: &TorusGrid) -> Field {
        let k = grid.dxi();
        Field::from_fn(*grid, |x| {
            self.modes.iter().enumerate().map(|(m, (c, s))| c * (k * m as f64 * x[0]).cos() + s * (k * m as f64 * x[0]).sin()).sum()
        })
    }

    pub fn time(&self, s: f64) -> f64 {
        1.0 + 0.5 * (self.omega * s + self.phase).sin()
    }
}

/// Graded Gauss-Legendre rule on `[0, t_max]`: panel ends `t_max (i/n)^3`.
fn graded_rule(t_max: f64, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(4);
    let mut out = Vec::with_capacity(4 * panels);
    for i in 0..panels {
        let a = t_max * (i as f64 / panels as f64).powi(3);
        let b = t_max * ((i + 1) as f64 / panels as f64).powi(3);
        for (xi, wi) in x.iter().zip(&w) {
            out.push((0.5 * (a + b) + 0.5 * (b - a) * xi, 0.5 * (b - a) * wi));
        }
    }
    out
}

/// `(LHS, RHS)` of the estimate for one test function on one mesh level.
pub fn convolution_sides(cfg: &BesovConfig, level: MeshLevel, tf: &TestFunction) -> Result<(f64, f64)> {
    let env = cfg.envelope()?;
    let grid = TorusGrid::new(1, level.n, cfg.l)?;
    let partition = DyadicPartition::build(&grid)?;
    let p = cfg.p;
    let g = tf.space(&grid);
    let spec = g.spectrum();
    let (classes, class_of) = grid.radial_classes();
    let dxi2 = grid.dxi().powi(2);
    let q: Vec<f64> = classes.iter().map(|&m| dxi2 * m as f64).collect();
    let rule = graded_rule(cfg.t_max, level.steps);
    let kernel_norm = |t: f64| -> Result<f64> {
        let kind = match cfg.kind {
            ConvolutionKind::Q => KernelKind::Q { beta: env.beta },
            ConvolutionKind::P => KernelKind::P,
            ConvolutionKind::BigP => KernelKind::BigP,
        };
        let sym = KernelSymbol::new(kind, cfg.alpha, t)?.with_gamma(env.order)?;
        let vals = symbol_values(&sym, &q)?;
        let conv: Vec<_> = spec.iter().zip(&class_of).map(|(c, k)| c * vals[*k]).collect();
        Ok(Field::from_spectrum(grid, &conv)?.lp_norm_pow(p))
    };
    let norms: Vec<f64> = rule.par_iter().map(|&(t, _)| kernel_norm(t)).collect::<Result<_>>()?;
    let bnorm = besov_from_bands(&partition.band_norms(&g, p)?, cfg.besov_index()?, p);
    let (gx, gw) = gauss_legendre(16);
    let a_pow = |hi: f64| -> f64 {
        gx.iter().zip(&gw).map(|(x, w)| 0.5 * hi * w * tf.time(0.5 * hi * (1.0 + x)).abs().powf(p)).sum()
    };
    match cfg.kind {
        ConvolutionKind::Q => {
            // int_0^T int_0^t F(t - s) |a(s)|^p ds dt = int_0^T F(r) int_0^{T-r} |a|^p ds dr
            let lhs = rule.iter().zip(&norms).map(|((r, w), f)| w * f * a_pow(cfg.t_max - r)).sum();
            Ok((lhs, bnorm.powf(p) * a_pow(cfg.t_max)))
        }
        _ => {
            let lhs = rule.iter().zip(&norms).map(|((_, w), f)| w * f).sum();
            Ok((lhs, bnorm.powf(p)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRatio {
    pub n: usize,
    pub steps: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStudy {
    pub claim: String,
    pub samples: usize,
    pub levels: Vec<LevelRatio>,
    /// Largest ratio of consecutive level maxima.
    pub growth: f64,
    pub growth_limit: f64,
}

impl RatioStudy {
    pub fn passed(&self) -> bool {
        self.growth.is_finite() && self.growth <= self.growth_limit
    }

    pub fn to_report(&self, params: serde_json::Value) -> Report {
        let mut fitted = BTreeMap::new();
        fitted.insert("growth".to_string(), self.growth);
        if let Some(last) = self.levels.last() {
            fitted.insert("C".to_string(), last.max_ratio);
        }
        Report {
            claim: self.claim.clone(),
            params,
            fitted_constants: fitted,
            violations: usize::from(!self.passed()),
            ratios_by_level: self.levels.iter().map(to_value).collect(),
            verdict: Verdict::from_bool(self.passed()),
        }
    }
}

pub(crate) fn growth_of(levels: &[LevelRatio], pick: impl Fn(&LevelRatio) -> f64) -> f64 {
    levels.windows(2).map(|w| pick(&w[1]) / pick(&w[0])).fold(0.0, f64::max)
}

pub fn verify_besov_convolution(cfg: &BesovConfig) -> Result<RatioStudy> {
    if cfg.levels.len() < 2 {
        return Err(Error::Parameter("a ratio study needs at least two mesh levels".into()));
    }
    if cfg.samples == 0 {
        return Err(Error::Parameter("samples must be >= 1".into()));
    }
    cfg.besov_index()?;
    let mut levels = Vec::new();
    for &level in &cfg.levels {
        let count = level.n / 2;
        let ratios: Vec<f64> = (0..cfg.samples)
            .into_par_iter()
            .map(|s| {
                let tf = TestFunction::random(cfg.seed, s, count, cfg.decay);
                let (lhs, rhs) = convolution_sides(cfg, level, &tf)?;
                Ok(lhs / rhs)
            })
            .collect::<Result<_>>()?;
        let (mean, hw) = super::report::mean_and_halfwidth(&ratios);
        levels.push(LevelRatio {
            n: level.n,
            steps: level.steps,
            max_ratio: ratios.iter().copied().fold(0.0, f64::max),
            mean_ratio: mean,
            half_width: hw,
        });
    }
    let claim = match cfg.kind {
        ConvolutionKind::Q => "besov-conv-q",
        ConvolutionKind::P => "besov-conv-p",
        ConvolutionKind::BigP => "besov-conv-P",
    };
    Ok(RatioStudy {
        claim: claim.into(),
        samples: cfg.samples,
        growth: growth_of(&levels, |l| l.max_ratio),
        levels,
        growth_limit: cfg.growth_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{ml, MLParams};

    #[test]
    fn single_mode_matches_quadrature() {
        let mut cfg = BesovConfig::new(ConvolutionKind::P, 0.8);
        cfg.t_max = 1.0;
        let tf = TestFunction { modes: vec![(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)], omega: 0.0, phase: 0.0 };
        let level = MeshLevel { n: 32, steps: 64 };
        let (lhs, _) = convolution_sides(&cfg, level, &tf).unwrap();
        // ||cos(3x)||_2^2 = pi, so LHS = pi int_0^1 E(-9 t^0.8)^2 dt
        let f = |t: f64| ml(MLParams::new(0.8, 1.0).unwrap(), -9.0 * t.powf(0.8)).unwrap().powi(2);
        let (want, _) = crate::quad::integrate_gk(f, &[0.0, 1e-3, 0.1, 1.0], 1e-13, 400).unwrap();
        assert!((lhs - PI * want).abs() < 1e-7 * lhs, "{lhs} vs {}", PI * want);
    }

    #[test]
    fn zero_data_gives_zero_sides() {
        let cfg = BesovConfig::new(ConvolutionKind::Q, 1.0);
        let tf = TestFunction { modes: vec![(0.0, 0.0); 4], omega: 1.0, phase: 0.0 };
        let (lhs, rhs) = convolution_sides(&cfg, MeshLevel { n: 16, steps: 8 }, &tf).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
    }

    #[test]
    fn refinement_extends_test_functions() {
        let a = TestFunction::random(3, 7, 8, 1.0);
        let b = TestFunction::random(3, 7, 16, 1.0);
        assert_eq!(a.modes[..], b.modes[..8]);
    }
}

//! Dyadic `L_1` envelopes of the kernels `q`, `p` and `P`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{log_space, to_value, Report, Verdict};
use crate::error::{Error, Result};
use crate::kernels::{symbol_values, KernelKind, KernelSymbol};
use crate::lpnorms::DyadicPartition;
use crate::torus::{Field, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeKind {
    #[serde(rename = "q")]
    Q,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "P")]
    BigP,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub kind: EnvelopeKind,
    pub alpha: f64,
    /// `q` only; defaults to `alpha/2 + 1/p`.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_l")]
    pub l: f64,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_t_points")]
    pub t_points: usize,
    #[serde(default = "default_j_min")]
    pub j_min: usize,
    #[serde(default = "default_j_max")]
    pub j_max: usize,
    /// Factor applied to the largest calibration ratio.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_p() -> f64 {
    2.0
}
fn default_d() -> usize {
    1
}
fn default_n() -> usize {
    4096
}
fn default_l() -> f64 {
    64.0
}
fn default_t_min() -> f64 {
    1e-6
}
fn default_t_max() -> f64 {
    1.0
}
fn default_t_points() -> usize {
    20
}
fn default_j_min() -> usize {
    1
}
fn default_j_max() -> usize {
    6
}
fn default_margin() -> f64 {
    2.0
}

impl EnvelopeConfig {
    pub fn new(kind: EnvelopeKind, alpha: f64) -> Self {
        Self {
            kind,
            alpha,
            beta: None,
            p: default_p(),
            epsilon: None,
            delta: None,
            d: default_d(),
            n: default_n(),
            l: default_l(),
            t_min: default_t_min(),
            t_max: default_t_max(),
            t_points: default_t_points(),
            j_min: default_j_min(),
            j_max: default_j_max(),
            margin: default_margin(),
        }
    }
}

/// Envelope exponents after defaults and admissibility checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub kind: EnvelopeKind,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Order of `(-Delta)^{order/2}` applied to the kernel.
    pub order: f64,
}

impl Envelope {
    pub fn from_config(cfg: &EnvelopeConfig) -> Result<Self> {
        let (a, p) = (cfg.alpha, cfg.p);
        if !(a > 0.0 && a < 2.0) {
            return Err(Error::Parameter(format!("violated: alpha in (0, 2) (alpha = {a})")));
        }
        if !(p >= 2.0) {
            return Err(Error::Parameter(format!("violated: p >= 2 (p = {p})")));
        }
        match cfg.kind {
            EnvelopeKind::Q => {
                let beta = cfg.beta.unwrap_or(0.5 * a + 1.0 / p);
                if !(1.0 / p < beta && beta < a + 1.0 / p) {
                    return Err(Error::Parameter(format!("violated: 1/p < beta < alpha + 1/p (beta = {beta})")));
                }
                let epsilon = cfg.epsilon.unwrap_or((beta - 1.0 / p) / a);
                let delta = cfg.delta.unwrap_or(0.5 * (a - beta + 1.0 / p));
                if !(epsilon > 0.0 && 1.0 / p < beta - 0.5 * a * epsilon) {
                    return Err(Error::Parameter(format!(
                        "violated: 1/p < beta - (alpha/2) epsilon with epsilon > 0 (epsilon = {epsilon})"
                    )));
                }
                if !(beta - a < 1.0 / p - delta && delta > 0.0) {
                    return Err(Error::Parameter(format!(
                        "violated: beta - alpha < 1/p - delta < 1/p (delta = {delta})"
                    )));
                }
                let order = 2.0 * (a + 1.0 / p - beta) / a + epsilon;
                Ok(Self { kind: cfg.kind, alpha: a, beta, p, epsilon, delta, order })
            }
            EnvelopeKind::P => Ok(Self { kind: cfg.kind, alpha: a, beta: a, p, epsilon: 0.0, delta: 0.0, order: 0.0 }),
            EnvelopeKind::BigP => {
                if !(a > 1.0) {
                    return Err(Error::Parameter(format!("violated: alpha in (1, 2) for P (alpha = {a})")));
                }
                let delta = cfg.delta.unwrap_or(0.5 * a);
                if !(delta > 0.0 && delta < a) {
                    return Err(Error::Parameter(format!("violated: delta in (0, alpha) (delta = {delta})")));
                }
                Ok(Self { kind: cfg.kind, alpha: a, beta: a - 1.0, p, epsilon: 0.0, delta, order: 0.0 })
            }
        }
    }

    /// Envelope shape without its constant.
    pub fn shape(&self, j: usize, t: f64) -> f64 {
        let (a, p, e, dl) = (self.alpha, self.p, self.epsilon, self.delta);
        let jf = j as f64;
        match self.kind {
            EnvelopeKind::Q => {
                let first = 2f64.powf((2.0 * dl / a + e) * jf) * t.powf(-1.0 / p + dl);
                first.min(t.powf(-1.0 / p - 0.5 * a * e))
            }
            EnvelopeKind::P => (2f64.powf(-2.0 * jf / a) / t).min(1.0),
            EnvelopeKind::BigP => (2f64.powf(-2.0 * jf + 2.0 * dl * jf / a) * t.powf(1.0 - a + dl)).min(t),
        }
    }

    pub fn symbol(&self, t: f64) -> Result<KernelSymbol> {
        let kind = match self.kind {
            EnvelopeKind::Q => KernelKind::Q { beta: self.beta },
            EnvelopeKind::P => KernelKind::P,
            EnvelopeKind::BigP => KernelKind::BigP,
        };
        KernelSymbol::new(kind, self.alpha, t)?.with_gamma(self.order)
    }
}

/// `||Psi_j * K(t)||_{L_1}` for every band of `partition`.
pub fn band_l1_norms(sym: &KernelSymbol, partition: &DyadicPartition) -> Result<Vec<f64>> {
    let grid = partition.grid();
    let (classes, class_of) = grid.radial_classes();
    let dxi2 = grid.dxi().powi(2);
    let q: Vec<f64> = classes.iter().map(|&m| dxi2 * m as f64).collect();
    let vals = symbol_values(sym, &q)?;
    let scale = grid.len() as f64 / grid.volume();
    (0..partition.band_count())
        .map(|j| {
            let spec: Vec<Complex64> = (0..grid.len())
                .map(|i| Complex64::new(vals[class_of[i]] * partition.window(j, i) * scale, 0.0))
                .collect();
            let f = Field::from_spectrum(grid, &spec)?;
            Ok(f.values().iter().map(|v| v.abs()).sum::<f64>() * grid.cell_volume())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub j: usize,
    pub t: f64,
    pub norm: f64,
    pub envelope: f64,
    pub calibration: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub claim: String,
    pub envelope: Envelope,
    pub constant: f64,
    pub calibration_points: usize,
    pub held_out_points: usize,
    pub violations: usize,
    pub max_ratio: f64,
    pub points: Vec<EnvelopePoint>,
}

impl EnvelopeReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn claim_name(kind: EnvelopeKind) -> &'static str {
    match kind {
        EnvelopeKind::Q => "band-envelope-q",
        EnvelopeKind::P => "band-envelope-p",
        EnvelopeKind::BigP => "band-envelope-P",
    }
}

/// Measures the band norms on the `(j, t)` grid, fits the constant on the
/// points with `j + i_t` even and counts held-out points above the fit.
pub fn verify_band_envelopes(cfg: &EnvelopeConfig) -> Result<EnvelopeReport> {
    let env = Envelope::from_config(cfg)?;
    let grid = TorusGrid::new(cfg.d, cfg.n, cfg.l)?;
    let partition = DyadicPartition::build(&grid)?;
    if cfg.j_min < 1 || cfg.j_max < cfg.j_min || cfg.j_max > partition.top_band() {
        return Err(Error::Resolution(format!(
            "bands {}..={} need 1 <= j_min <= j_max <= {}",
            cfg.j_min,
            cfg.j_max,
            partition.top_band()
        )));
    }
    if !(cfg.t_min > 0.0 && cfg.t_max > cfg.t_min) || cfg.t_points < 2 {
        return Err(Error::Parameter("time grid needs 0 < t_min < t_max and >= 2 points".into()));
    }
    let times = log_space(cfg.t_min, cfg.t_max, cfg.t_points);
    let per_time: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| band_l1_norms(&env.symbol(t)?, &partition))
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    for (it, (&t, norms)) in times.iter().zip(&per_time).enumerate() {
        for (j, &norm) in norms.iter().enumerate().take(cfg.j_max + 1).skip(cfg.j_min) {
            points.push(EnvelopePoint {
                j,
                t,
                norm,
                envelope: env.shape(j, t),
                calibration: (j + it) % 2 == 0,
            });
        }
    }
    let ratio = |p: &EnvelopePoint| p.norm / p.envelope;
    let cal_max = points.iter().filter(|p| p.calibration).map(ratio).fold(0.0, f64::max);
    let constant = cfg.margin * cal_max;
    let held: Vec<&EnvelopePoint> = points.iter().filter(|p| !p.calibration).collect();
    let violations = held.iter().filter(|p| p.norm > constant * p.envelope).count();
    let max_ratio = points.iter().map(ratio).fold(0.0, f64::max);
    Ok(EnvelopeReport {
        claim: claim_name(cfg.kind).into(),
        envelope: env,
        constant,
        calibration_points: points.len() - held.len(),
        held_out_points: held.len(),
        violations,
        max_ratio,
        points,
    })
}

impl EnvelopeReport {
    pub fn to_report(&self, cfg: &EnvelopeConfig) -> Report {
        let mut fitted = BTreeMap::new();
        fitted.insert("C".to_string(), self.constant);
        fitted.insert("max_ratio".to_string(), self.max_ratio);
        let mut by_band: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for p in &self.points {
            let r = p.norm / p.envelope;
            let e = by_band.entry(p.j).or_insert((f64::INFINITY, 0.0));
            e.0 = e.0.min(r);
            e.1 = e.1.max(r);
        }
        let ratios_by_level = by_band
            .into_iter()
            .map(|(j, (lo, hi))| json!({"band": j, "min_ratio": lo, "max_ratio": hi}))
            .collect();
        Report {
            claim: self.claim.clone(),
            params: json!({"config": to_value(cfg), "envelope": to_value(&self.envelope),
                "calibration_points": self.calibration_points, "held_out_points": self.held_out_points}),
            fitted_constants: fitted,
            violations: self.violations,
            ratios_by_level,
            verdict: Verdict::from_bool(self.passed()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: EnvelopeKind, alpha: f64) -> EnvelopeConfig {
        EnvelopeConfig { n: 512, l: 16.0, t_points: 8, j_max: 4, ..EnvelopeConfig::new(kind, alpha) }
    }

    #[test]
    fn heat_kernel_envelope_passes() {
        let r = verify_band_envelopes(&small(EnvelopeKind::P, 1.0)).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.constant > 0.0);
    }

    #[test]
    fn q_with_beta_equal_alpha_matches_p_norms() {
        let grid = TorusGrid::new(1, 256, 16.0).unwrap();
        let part = DyadicPartition::build(&grid).unwrap();
        let p = KernelSymbol::new(KernelKind::P, 0.7, 0.3).unwrap();
        let q = KernelSymbol::new(KernelKind::Q { beta: 0.7 }, 0.7, 0.3).unwrap();
        let a = band_l1_norms(&p, &part).unwrap();
        let b = band_l1_norms(&q, &part).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-14 * x.max(1e-300));
        }
    }

    #[test]
    fn big_p_small_time_branch_is_t() {
        let env = Envelope::from_config(&small(EnvelopeKind::BigP, 1.4)).unwrap();
        assert_eq!(env.shape(1, 1e-6), 1e-6);
    }

    #[test]
    fn inadmissible_parameters_are_named() {
        let mut cfg = small(EnvelopeKind::Q, 1.0);
        cfg.epsilon = Some(5.0);
        let msg = verify_band_envelopes(&cfg).unwrap_err().to_string();
        assert!(msg.contains("epsilon"), "{msg}");
        let msg = verify_band_envelopes(&small(EnvelopeKind::BigP, 0.8)).unwrap_err().to_string();
        assert!(msg.contains("alpha in (1, 2)"), "{msg}");
    }
}

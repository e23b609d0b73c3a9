//! Monte-Carlo maximal-regularity ratio
//! `||Delta u|| / (||f|| + ||(-Delta)^{c0/2} g|| + ||(-Delta)^{c0_bar/2} h||)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::besov::{growth_of, LevelRatio, MeshLevel, RatioStudy};
use super::report::{mean_and_halfwidth, to_value};
use crate::error::{Error, Result};
use crate::fraccalc::TimeGrid;
use crate::kernels::{spectral_multiplier, Multiplier};
use crate::levy::{sample_jump_path, sample_wiener, JumpLaw, LevySpec};
use crate::params::{derived_exponents, ProblemParams};
use crate::solver::{solve_linear, Noise, ProblemData, SpaceTimeFn};
use crate::torus::{Field, TorusGrid};

/// Which free terms are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    pub f: bool,
    pub g: bool,
    pub h: bool,
}

impl Default for Terms {
    fn default() -> Self {
        Self { f: true, g: true, h: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxRegConfig {
    pub params: ProblemParams,
    #[serde(default = "default_levels")]
    pub levels: Vec<MeshLevel>,
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
    #[serde(default)]
    pub terms: Terms,
    #[serde(default = "default_growth")]
    pub growth_limit: f64,
}

fn default_levels() -> Vec<MeshLevel> {
    vec![MeshLevel { n: 32, steps: 32 }, MeshLevel { n: 64, steps: 64 }]
}
fn default_l() -> f64 {
    2.0 * PI
}
fn default_t() -> f64 {
    1.0
}
fn default_samples() -> usize {
    200
}
fn default_levy() -> LevySpec {
    LevySpec { lambda: 4.0, law: JumpLaw::TwoPoint, sigma: 1.0, d1: 1, copies: 1 }
}
fn default_growth() -> f64 {
    1.25
}

impl MaxRegConfig {
    pub fn new(params: ProblemParams) -> Self {
        Self {
            params,
            levels: default_levels(),
            l: default_l(),
            t_max: default_t(),
            samples: default_samples(),
            seed: 0,
            levy: default_levy(),
            terms: Terms::default(),
            growth_limit: default_growth(),
        }
    }
}

/// Deterministic free terms used by the study.
pub fn study_forcing(grid: TorusGrid, t_max: f64) -> (SpaceTimeFn, SpaceTimeFn, SpaceTimeFn) {
    let w = 2.0 * PI / grid.period();
    let f: SpaceTimeFn = Arc::new(move |t| {
        Field::from_fn(grid, |x| (1.0 + t / t_max) * (w * x[0]).cos() + 0.5 * (2.0 * w * x[0]).sin())
    });
    let g: SpaceTimeFn = Arc::new(move |t| {
        Field::from_fn(grid, |x| (0.5 + (PI * t / t_max).cos().abs()) * ((w * x[0]).sin() + 0.3 * (3.0 * w * x[0]).cos()))
    });
    let h: SpaceTimeFn =
        Arc::new(move |_| Field::from_fn(grid, |x| 0.4 + 0.5 * (2.0 * w * x[0]).cos() + 0.2 * (5.0 * w * x[0]).sin()));
    (f, g, h)
}

fn time_lp_pow(times: &[f64], pow: &[f64]) -> f64 {
    (0..times.len() - 1).map(|i| 0.5 * (times[i + 1] - times[i]) * (pow[i] + pow[i + 1])).sum()
}

/// `int_0^T ||M v(t)||_p^p dt` on the uniform nodes of `time`.
fn data_norm_pow(v: &SpaceTimeFn, m: Multiplier, time: TimeGrid, p: f64) -> f64 {
    let nodes = time.nodes();
    let pow: Vec<f64> = nodes.iter().map(|&t| spectral_multiplier(&v(t), m).lp_norm_pow(p)).collect();
    time_lp_pow(&nodes, &pow)
}

pub fn verify_max_regularity(cfg: &MaxRegConfig) -> Result<RatioStudy> {
    let ps = cfg.params.validated()?;
    let ex = derived_exponents(&ps)?;
    if !(ex.theta > 0.0) {
        return Err(Error::Parameter(format!("theta = {} must be positive", ex.theta)));
    }
    if cfg.levels.len() < 2 || cfg.samples < 2 {
        return Err(Error::Parameter("need at least two mesh levels and two samples".into()));
    }
    let finest = cfg.levels.iter().map(|l| l.steps).max().unwrap_or(1);
    if cfg.levels.iter().any(|l| finest % l.steps != 0) {
        return Err(Error::Parameter("level step counts must divide the finest one".into()));
    }
    let p = ps.p;
    let fine_time = TimeGrid::new(cfg.t_max, finest)?;
    let mut levels = Vec::new();
    for &level in &cfg.levels {
        let grid = TorusGrid::new(1, level.n, cfg.l)?;
        let time = TimeGrid::new(cfg.t_max, level.steps)?;
        let (f, g, h) = study_forcing(grid, cfg.t_max);
        let mut rhs = 0.0;
        if cfg.terms.f {
            rhs += data_norm_pow(&f, Multiplier::FracLaplacian(0.0), time, p).powf(1.0 / p);
        }
        if cfg.terms.g {
            rhs += data_norm_pow(&g, Multiplier::FracLaplacian(ex.c0), time, p).powf(1.0 / p);
        }
        if cfg.terms.h {
            rhs += data_norm_pow(&h, Multiplier::FracLaplacian(ex.c0_bar), time, p).powf(1.0 / p);
        }
        let data = ProblemData {
            u0: Field::zeros(grid),
            v0: None,
            f: cfg.terms.f.then(|| f.clone()),
            g: if cfg.terms.g { vec![g.clone()] } else { Vec::new() },
            h: if cfg.terms.h { vec![vec![h.clone(); cfg.levy.d1]] } else { Vec::new() },
        };
        let lhs_pow: Vec<f64> = (0..cfg.samples)
            .into_par_iter()
            .map(|s| {
                let seed = cfg.seed.wrapping_add(s as u64);
                let wiener = if cfg.terms.g {
                    Some(sample_wiener(fine_time, 1, seed).coarsened(finest / level.steps)?)
                } else {
                    None
                };
                let jumps = if cfg.terms.h { vec![sample_jump_path(&cfg.levy, cfg.t_max, seed, 0)?] } else { Vec::new() };
                let noise = Noise { wiener, jumps, seed: Some(seed) };
                let sol = solve_linear(&data, &ps, &grid, time, &noise)?;
                let pow: Vec<f64> = sol
                    .values
                    .iter()
                    .map(|u| spectral_multiplier(u, Multiplier::FracLaplacian(2.0)).lp_norm_pow(p))
                    .collect();
                Ok(time_lp_pow(&sol.times, &pow))
            })
            .collect::<Result<_>>()?;
        let (mean, hw) = mean_and_halfwidth(&lhs_pow);
        let ratio = mean.powf(1.0 / p) / rhs;
        levels.push(LevelRatio {
            n: level.n,
            steps: level.steps,
            max_ratio: ratio,
            mean_ratio: ratio,
            half_width: ratio * hw / (p * mean.max(f64::MIN_POSITIVE)),
        });
    }
    Ok(RatioStudy {
        claim: "max-reg".into(),
        samples: cfg.samples,
        growth: growth_of(&levels, |l| l.mean_ratio),
        levels,
        growth_limit: cfg.growth_limit,
    })
}

pub fn max_regularity_params(cfg: &MaxRegConfig) -> Result<serde_json::Value> {
    Ok(json!({"config": to_value(cfg), "derived": to_value(&derived_exponents(&cfg.params)?)}))
}

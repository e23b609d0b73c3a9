//! Tabulated `v -> E_{a,b}(-v)` for repeated evaluation at fixed `(a, b)`.
//!
//! The series coefficients `1/Gamma(a k + b)` are precomputed; beyond the
//! series radius the function is stored as piecewise Chebyshev
//! interpolants in `w = ln v`. Panels are narrowed in `v^{1/a}` while the
//! exponentially damped oscillating component is above double precision.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::gamma::rgamma;
use super::mittag_leffler::{ml, series_radius, MLParams, SERIES_TERM_CAP};
use crate::error::Result;

const DEGREE: usize = 24;
const LOG_WIDTH: f64 = 0.5;
const OSC_WIDTH: f64 = 3.0;

#[derive(Debug, Clone)]
struct ChebPanel {
    w_lo: f64,
    w_hi: f64,
    coeffs: [f64; DEGREE + 1],
}

impl ChebPanel {
    fn build(params: MLParams, w_lo: f64, w_hi: f64) -> Result<Self> {
        let n = DEGREE + 1;
        let mut values = [0.0; DEGREE + 1];
        for (k, val) in values.iter_mut().enumerate() {
            let x = (PI * (k as f64 + 0.5) / n as f64).cos();
            let w = 0.5 * (w_lo + w_hi) + 0.5 * (w_hi - w_lo) * x;
            *val = ml(params, -w.exp())?;
        }
        let mut coeffs = [0.0; DEGREE + 1];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut s = 0.0;
            for (k, val) in values.iter().enumerate() {
                s += val * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
            }
            *c = 2.0 * s / n as f64;
        }
        coeffs[0] *= 0.5;
        Ok(Self { w_lo, w_hi, coeffs })
    }

    fn eval(&self, w: f64) -> f64 {
        let x = (2.0 * w - self.w_lo - self.w_hi) / (self.w_hi - self.w_lo);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + self.coeffs[0]
    }
}

/// Fast evaluator of `E_{a,b}(-v)` on `[0, v_max]`, falling back to the
/// direct routine above `v_max`.
#[derive(Debug, Clone)]
pub struct MlTable {
    params: MLParams,
    radius: f64,
    v_max: f64,
    coeffs: Vec<f64>,
    panels: Vec<ChebPanel>,
}

impl MlTable {
    pub fn new(params: MLParams, v_max: f64) -> Result<Self> {
        let radius = series_radius(params.a);
        let coeffs = (0..SERIES_TERM_CAP)
            .map(|k| rgamma(params.a * k as f64 + params.b))
            .collect();
        let mut bounds = Vec::new();
        let v_max = v_max.max(radius * 2.0);
        let w_end = v_max.ln();
        let mut w = radius.ln();
        let a = params.a;
        let damping = if a > 1.0 { (PI / a).cos().abs() } else { 1.0 };
        let s_limit = 40.0 / damping.max(1e-3);
        while w < w_end {
            let s = (w / a).exp();
            let mut next = w + LOG_WIDTH;
            if s < s_limit {
                next = next.min(a * (s + OSC_WIDTH).ln());
            }
            let next = next.min(w_end);
            bounds.push((w, next));
            w = next;
        }
        let panels = bounds
            .par_iter()
            .map(|&(lo, hi)| ChebPanel::build(params, lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { params, radius, v_max, coeffs, panels })
    }

    pub fn params(&self) -> MLParams {
        self.params
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// `E_{a,b}(-v)` for `v >= 0`.
    pub fn eval(&self, v: f64) -> f64 {
        if v <= self.radius {
            return self.series(-v);
        }
        if v > self.v_max {
            return ml(self.params, -v).unwrap_or(f64::NAN);
        }
        let w = v.ln();
        let idx = self.panels.partition_point(|p| p.w_hi < w).min(self.panels.len() - 1);
        self.panels[idx].eval(w)
    }

    fn series(&self, z: f64) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        let mut pow = 1.0;
        let mut small = 0;
        for &c in &self.coeffs {
            let term = c * pow;
            let t = sum + term;
            if f64::abs(sum) >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
            if term.abs() <= 1e-17 * (sum + comp).abs() {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
            pow *= z;
        }
        sum + comp
    }
}

type TableKey = (u64, u64);

fn cache() -> &'static Mutex<HashMap<TableKey, Arc<MlTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<MlTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Process-wide table for `(a, b)` covering at least `[0, v_max]`.
pub fn shared_table(params: MLParams, v_max: f64) -> Result<Arc<MlTable>> {
    let key = (params.a.to_bits(), params.b.to_bits());
    if let Some(t) = cache().lock().expect("table cache poisoned").get(&key) {
        if t.v_max >= v_max {
            return Ok(Arc::clone(t));
        }
    }
    // Grow geometrically so that repeated requests do not rebuild.
    let table = Arc::new(MlTable::new(params, v_max * 4.0)?);
    let mut guard = cache().lock().expect("table cache poisoned");
    let entry = guard.entry(key).or_insert_with(|| Arc::clone(&table));
    if entry.v_max < table.v_max {
        *entry = Arc::clone(&table);
    }
    Ok(Arc::clone(entry))
}

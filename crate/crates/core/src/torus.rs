//! Periodic grids on `[0, L)^d`, real fields and their discrete Fourier
//! transforms.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic grid with `n` nodes per axis, period `l`, dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    d: usize,
    n: usize,
    l: f64,
}

impl TorusGrid {
    pub fn new(d: usize, n: usize, l: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Shape(format!("dimension d = {d} must be 1, 2 or 3")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Shape(format!("modes per axis N = {n} must be even and >= 8")));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Shape(format!("period L = {l} must be positive")));
        }
        Ok(Self { d, n, l })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.l
    }

    /// Total number of nodes `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    pub fn volume(&self) -> f64 {
        self.l.powi(self.d as i32)
    }

    /// Fundamental frequency `2 pi / L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// Largest one-axis frequency magnitude `pi N / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.n as f64 / self.l
    }

    /// Signed integer wave number of FFT index `k`, in `[-N/2, N/2)`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        let n = self.n as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Multi-index of flat index `idx` (last axis fastest).
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for axis in (0..self.d).rev() {
            out[axis] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    /// Integer wave vector of a flat spectral index.
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let m = self.unravel(idx);
        let mut out = [0; 3];
        for axis in 0..self.d {
            out[axis] = self.wavenumber(m[axis]);
        }
        out
    }

    /// Integer `|m|^2` of a flat spectral index; `|xi|^2 = dxi^2 |m|^2`.
    pub fn wave_sq(&self, idx: usize) -> i64 {
        self.wavevector(idx).iter().map(|m| m * m).sum()
    }

    pub fn xi_sq(&self, idx: usize) -> f64 {
        self.dxi().powi(2) * self.wave_sq(idx) as f64
    }

    /// `|xi|^2` for every spectral index.
    pub fn xi_sq_all(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.xi_sq(i)).collect()
    }

    /// Node coordinates of a flat index.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let m = self.unravel(idx);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.d {
            x[axis] = m[axis] as f64 * h;
        }
        x
    }

    /// Distinct values of `|m|^2` over the grid together with, for each
    /// spectral index, the position of its value in that list.
    pub fn radial_classes(&self) -> (Vec<i64>, Vec<usize>) {
        let sq: Vec<i64> = (0..self.len()).map(|i| self.wave_sq(i)).collect();
        let mut uniq = sq.clone();
        uniq.sort_unstable();
        uniq.dedup();
        let pos = sq.iter().map(|s| uniq.binary_search(s).expect("value present")).collect();
        (uniq, pos)
    }

    fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!("grid mismatch: {self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Real scalar field sampled at the nodes of a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    grid: TorusGrid,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    pub fn new(grid: TorusGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Shape(format!(
                "field needs {} values, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    /// Samples `f(x)` at every node; `x` has `d` coordinates.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let data = (0..grid.len()).map(|i| f(&grid.coords(i)[..grid.d])).collect();
        Self { grid, data }
    }

    /// Real field from a spectrum via the inverse transform.
    pub fn from_spectrum(grid: TorusGrid, spectrum: &[Complex64]) -> Result<Self> {
        if spectrum.len() != grid.len() {
            return Err(Error::Shape("spectrum length does not match grid".into()));
        }
        let mut buf = spectrum.to_vec();
        fft_nd(&grid, &mut buf, true);
        let scale = 1.0 / grid.len() as f64;
        Ok(Self { grid, data: buf.iter().map(|c| c.re * scale).collect() })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    /// Unnormalized forward transform `sum_x f(x) e^{-i xi x}`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&self.grid, &mut buf, false);
        buf
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn axpy(&mut self, a: f64, other: &Field) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// Discrete `L_p` norm with cell-volume weights.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let h = self.grid.cell_volume();
        if p.is_infinite() {
            return self.max_abs();
        }
        (self.data.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h).powf(1.0 / p)
    }

    /// `sum |f|^p * cell volume`.
    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        self.data.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete integral `sum f * cell volume`.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_diff(&self, other: &Field) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Trigonometric interpolant at an arbitrary point; exact at the nodes.
    /// The Nyquist coefficient is split symmetrically so the result is real.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        trig_interpolate(&self.grid, &self.spectrum(), x)
    }
}

/// Evaluates the trigonometric interpolant of a spectrum at `x`.
pub fn trig_interpolate(grid: &TorusGrid, spectrum: &[Complex64], x: &[f64]) -> f64 {
    let n = grid.n;
    let dxi = grid.dxi();
    // per-axis phase factors with the Nyquist mode replaced by a cosine
    let factors: Vec<Vec<Complex64>> = (0..grid.d)
        .map(|axis| {
            (0..n)
                .map(|k| {
                    let m = grid.wavenumber(k);
                    if m == -(n as i64) / 2 {
                        Complex64::new((dxi * m as f64 * x[axis]).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, dxi * m as f64 * x[axis])
                    }
                })
                .collect()
        })
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (idx, c) in spectrum.iter().enumerate() {
        let m = grid.unravel(idx);
        let mut w = Complex64::new(1.0, 0.0);
        for axis in 0..grid.d {
            w *= factors[axis][m[axis]];
        }
        acc += c * w;
    }
    acc.re / grid.len() as f64
}

type PlanKey = (usize, bool);
type PlanCache = Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<PlanCache> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = plans.lock().expect("fft plan cache poisoned");
    Arc::clone(guard.entry((n, inverse)).or_insert_with(|| {
        let mut planner = FftPlanner::new();
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    }))
}

/// In-place unnormalized d-dimensional FFT of a row-major buffer.
pub fn fft_nd(grid: &TorusGrid, buf: &mut [Complex64], inverse: bool) {
    let n = grid.n;
    let fft = plan(n, inverse);
    let total = grid.len();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..grid.d {
        let stride = n.pow((grid.d - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = buf[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    buf[base + k * stride] = *v;
                }
            }
        }
    }
}

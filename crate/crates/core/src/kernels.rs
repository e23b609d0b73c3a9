//! Fundamental solutions `p`, `q_{alpha,beta}` and `P` through their Fourier
//! symbols `t^{alpha-beta-sigma} E_{alpha,1+alpha-beta-sigma}(-t^alpha |xi|^2)`,
//! and radial Fourier multipliers on torus fields.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{ml, shared_table, MLParams};
use crate::torus::{Field, TorusGrid};

/// Default bound on the symbol magnitude at the Nyquist frequency.
pub const DEFAULT_NYQUIST_TOL: f64 = 1e-12;

/// Largest per-axis resolution suggested by the aliasing check.
const MAX_SUGGESTED_N: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum KernelKind {
    /// `p = q_{alpha,alpha}`.
    #[serde(rename = "p")]
    P,
    /// `q_{alpha,beta} = I^{alpha-beta} p`.
    #[serde(rename = "q")]
    Q { beta: f64 },
    /// `P = q_{alpha,alpha-1}`, the time integral of `p`; needs `alpha > 1`.
    #[serde(rename = "P")]
    BigP,
}

/// Fourier symbol of a kernel at time `t`, optionally differentiated once in
/// time (`sigma = 1`) and multiplied by `|xi|^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSymbol {
    pub kind: KernelKind,
    pub alpha: f64,
    pub t: f64,
    pub sigma: u8,
    pub gamma: f64,
}

impl KernelSymbol {
    pub fn new(kind: KernelKind, alpha: f64, t: f64) -> Result<Self> {
        Self { kind, alpha, t, sigma: 0, gamma: 0.0 }.validated()
    }

    pub fn with_sigma(mut self, sigma: u8) -> Result<Self> {
        self.sigma = sigma;
        self.validated()
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validated()
    }

    pub fn at_time(mut self, t: f64) -> Result<Self> {
        self.t = t;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        let a = self.alpha;
        if !(a > 0.0 && a < 2.0) {
            return Err(Error::Parameter(format!("alpha = {a} must lie in (0, 2)")));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::Parameter(format!("kernel time t = {} must be positive", self.t)));
        }
        if self.sigma > 1 {
            return Err(Error::Parameter("only sigma = 0 or 1 time derivatives are provided".into()));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::Parameter(format!("multiplier order gamma = {} must be >= 0", self.gamma)));
        }
        match self.kind {
            KernelKind::Q { beta } if !(beta < a + 0.5) => {
                Err(Error::Parameter(format!("q kernel needs beta < alpha + 1/2 (beta = {beta}, alpha = {a})")))
            }
            KernelKind::BigP if !(a > 1.0) => {
                Err(Error::Parameter(format!("P kernel needs alpha > 1 (alpha = {a})")))
            }
            _ => Ok(self),
        }
    }

    /// The `beta` of the equivalent `q_{alpha,beta}`.
    pub fn beta(&self) -> f64 {
        match self.kind {
            KernelKind::P => self.alpha,
            KernelKind::Q { beta } => beta,
            KernelKind::BigP => self.alpha - 1.0,
        }
    }

    /// Power of `t` in front of the Mittag-Leffler factor.
    pub fn time_exponent(&self) -> f64 {
        self.alpha - self.beta() - self.sigma as f64
    }

    /// Mittag-Leffler parameters `(alpha, 1 + alpha - beta - sigma)`.
    pub fn ml_params(&self) -> MLParams {
        MLParams { a: self.alpha, b: 1.0 + self.time_exponent() }
    }
}

/// Symbol value `|xi|^gamma t^{alpha-beta-sigma} E_{alpha,1+alpha-beta-sigma}(-t^alpha |xi|^2)`.
pub fn symbol_value(sym: &KernelSymbol, xi_sq: f64) -> Result<f64> {
    if !(xi_sq >= 0.0) {
        return Err(Error::Domain(format!("|xi|^2 = {xi_sq} must be >= 0")));
    }
    if sym.gamma > 0.0 && xi_sq == 0.0 {
        return Ok(0.0);
    }
    let e = ml(sym.ml_params(), -sym.t.powf(sym.alpha) * xi_sq)?;
    Ok(multiplier_factor(sym, xi_sq) * e)
}

fn multiplier_factor(sym: &KernelSymbol, xi_sq: f64) -> f64 {
    let g = if sym.gamma == 0.0 { 1.0 } else { xi_sq.powf(0.5 * sym.gamma) };
    g * sym.t.powf(sym.time_exponent())
}

/// Symbol values for many `|xi|^2` through a shared interpolation table.
pub fn symbol_values(sym: &KernelSymbol, xi_sq: &[f64]) -> Result<Vec<f64>> {
    let ta = sym.t.powf(sym.alpha);
    let vmax = xi_sq.iter().fold(0.0f64, |m, &q| m.max(q)) * ta;
    let table = shared_table(sym.ml_params(), vmax.max(1.0))?;
    xi_sq
        .iter()
        .map(|&q| {
            if !(q >= 0.0) {
                return Err(Error::Domain(format!("|xi|^2 = {q} must be >= 0")));
            }
            if sym.gamma > 0.0 && q == 0.0 {
                return Ok(0.0);
            }
            Ok(multiplier_factor(sym, q) * table.eval(ta * q))
        })
        .collect()
}

/// Symbol magnitude at the one-axis Nyquist frequency of `grid`.
pub fn nyquist_magnitude(sym: &KernelSymbol, grid: &TorusGrid) -> Result<f64> {
    Ok(symbol_value(sym, grid.nyquist().powi(2))?.abs())
}

/// Checks the aliasing criterion; on failure names the smallest power-of-two
/// multiple of `N` that passes.
pub fn check_resolution(sym: &KernelSymbol, grid: &TorusGrid, tol: f64) -> Result<()> {
    let mag = nyquist_magnitude(sym, grid)?;
    if mag < tol {
        return Ok(());
    }
    let mut n = grid.modes();
    while n < MAX_SUGGESTED_N {
        n *= 2;
        let nyq = std::f64::consts::PI * n as f64 / grid.period();
        if symbol_value(sym, nyq * nyq)?.abs() < tol {
            return Err(Error::Resolution(format!(
                "symbol is {mag:.3e} at the Nyquist frequency (tolerance {tol:.1e}); need N >= {n}"
            )));
        }
    }
    Err(Error::Resolution(format!(
        "symbol is {mag:.3e} at the Nyquist frequency (tolerance {tol:.1e}); need N > {MAX_SUGGESTED_N}"
    )))
}

/// Spectrum (`|xi|`-radial, real) of the kernel as a torus field, scaled so
/// that the inverse FFT returns the periodized kernel.
pub fn kernel_spectrum(sym: &KernelSymbol, grid: &TorusGrid) -> Result<Vec<Complex64>> {
    let (classes, pos) = grid.radial_classes();
    let dxi2 = grid.dxi().powi(2);
    let xi_sq: Vec<f64> = classes.iter().map(|&m| dxi2 * m as f64).collect();
    let vals = symbol_values(sym, &xi_sq)?;
    let scale = grid.len() as f64 / grid.volume();
    Ok(pos.iter().map(|&c| Complex64::new(vals[c] * scale, 0.0)).collect())
}

/// Kernel field at time `sym.t` on the torus, after the aliasing check.
pub fn kernel_field(sym: &KernelSymbol, grid: &TorusGrid, nyquist_tol: f64) -> Result<Field> {
    check_resolution(sym, grid, nyquist_tol)?;
    Field::from_spectrum(*grid, &kernel_spectrum(sym, grid)?)
}

/// Radial Fourier multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "gamma")]
pub enum Multiplier {
    /// `(-Delta)^{gamma/2}`, symbol `|xi|^gamma`.
    FracLaplacian(f64),
    /// `(1 - Delta)^{gamma/2}`, symbol `(1 + |xi|^2)^{gamma/2}`.
    Bessel(f64),
}

impl Multiplier {
    pub fn symbol(&self, xi_sq: f64) -> f64 {
        match *self {
            Multiplier::FracLaplacian(g) => {
                if g == 0.0 {
                    1.0
                } else if xi_sq == 0.0 {
                    0.0
                } else {
                    xi_sq.powf(0.5 * g)
                }
            }
            Multiplier::Bessel(g) => (1.0 + xi_sq).powf(0.5 * g),
        }
    }
}

/// Applies a radial multiplier mode by mode.
pub fn spectral_multiplier(field: &Field, m: Multiplier) -> Field {
    apply_radial(field, |q| m.symbol(q))
}

/// Multiplies the spectrum of `field` by `symbol(|xi|^2)`.
pub fn apply_radial(field: &Field, symbol: impl Fn(f64) -> f64) -> Field {
    let grid = field.grid();
    let mut spec = field.spectrum();
    let (classes, pos) = grid.radial_classes();
    let dxi2 = grid.dxi().powi(2);
    let vals: Vec<f64> = classes.iter().map(|&m| symbol(dxi2 * m as f64)).collect();
    for (c, &k) in spec.iter_mut().zip(&pos) {
        *c *= vals[k];
    }
    Field::from_spectrum(grid, &spec).expect("spectrum matches grid")
}

//! Riemann-Liouville integral, Riemann-Liouville derivative and Caputo
//! derivative on uniform grids.
//!
//! The integral uses product integration of the piecewise-linear
//! interpolant, which is exact on linear functions. Derivatives apply
//! finite differences to `I^{m - alpha} phi` with `m = ceil(alpha)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::rgamma;

/// Distance to an integer below which orders are treated as integers.
pub const INTEGER_SNAP: f64 = 1e-12;

/// Uniform grid `t_i = i * tmax / n`, `i = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    tmax: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(tmax: f64, n: usize) -> Result<Self> {
        if !(tmax > 0.0) || !tmax.is_finite() {
            return Err(Error::Domain(format!("horizon T = {tmax} must be positive")));
        }
        if n < 2 {
            return Err(Error::Shape(format!("time grid needs n >= 2 steps, got {n}")));
        }
        Ok(Self { tmax, n })
    }

    pub fn tmax(&self) -> f64 {
        self.tmax
    }

    /// Number of steps; there are `n + 1` nodes.
    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.tmax / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.tmax
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    /// Grid with `factor` times as many steps on the same horizon.
    pub fn refined(&self, factor: usize) -> Self {
        Self { tmax: self.tmax, n: self.n * factor }
    }
}

/// Scalar samples on a [`TimeGrid`], interpolated piecewise linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Piecewise-linear interpolation at `t` in `[0, T]`.
    pub fn interpolate(&self, t: f64) -> f64 {
        let dt = self.grid.dt();
        let x = (t / dt).clamp(0.0, self.grid.n as f64);
        let i = (x.floor() as usize).min(self.grid.n - 1);
        let w = x - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }
}

fn snap_integer(alpha: f64) -> Option<usize> {
    let r = alpha.round();
    ((alpha - r).abs() <= INTEGER_SNAP && r >= 0.0).then_some(r as usize)
}

/// Product-integration weights: node `n` combines `start(n) phi_0`,
/// `interior(n - j) phi_j` for `0 < j < n` and `phi_n`, times `scale`.
struct PiWeights {
    alpha: f64,
    scale: f64,
    pow: Vec<f64>,
}

impl PiWeights {
    fn new(alpha: f64, dt: f64, n: usize) -> Self {
        let pow = (0..=n + 1).map(|k| (k as f64).powf(alpha + 1.0)).collect();
        Self { alpha, scale: dt.powf(alpha) * rgamma(alpha + 2.0), pow }
    }

    fn start(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.pow[n - 1] - (nf - self.alpha - 1.0) * nf.powf(self.alpha)
    }

    fn interior(&self, m: usize) -> f64 {
        self.pow[m + 1] - 2.0 * self.pow[m] + self.pow[m - 1]
    }
}

/// `I^alpha phi` on the grid of `values` (spacing `dt`), any `alpha > 0`.
pub fn frac_integral_values(values: &[f64], dt: f64, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("integral order alpha = {alpha} must be positive")));
    }
    let alpha = snap_integer(alpha).map_or(alpha, |m| m as f64);
    let n = values.len().saturating_sub(1);
    let w = PiWeights::new(alpha, dt, n);
    let mut out = vec![0.0; values.len()];
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let mut s = w.start(k) * values[0] + values[k];
        for (j, v) in values.iter().enumerate().take(k).skip(1) {
            s += w.interior(k - j) * v;
        }
        *slot = w.scale * s;
    }
    Ok(out)
}

/// Riemann-Liouville fractional integral of order `alpha > 0`.
pub fn frac_integral(phi: &GridFunction, alpha: f64) -> Result<GridFunction> {
    let values = frac_integral_values(&phi.values, phi.grid.dt(), alpha)?;
    Ok(GridFunction { grid: phi.grid, values })
}

fn check_order(alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!("derivative order alpha = {alpha} must lie in (0, 2)")));
    }
    Ok(alpha.ceil() as usize)
}

fn first_difference(v: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = v.len();
    if n < 3 {
        return Err(Error::Shape(format!("first difference needs 3 nodes, got {n}")));
    }
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
    }
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt);
    Ok(out)
}

fn second_difference(v: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = v.len();
    if n < 4 {
        return Err(Error::Shape(format!("second difference needs 4 nodes, got {n}")));
    }
    let h2 = dt * dt;
    let mut out = vec![0.0; n];
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    }
    out[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    Ok(out)
}

fn rl_values(values: &[f64], dt: f64, alpha: f64) -> Result<Vec<f64>> {
    let m = check_order(alpha)?;
    let psi = match snap_integer(alpha) {
        Some(_) => values.to_vec(),
        None => frac_integral_values(values, dt, m as f64 - alpha)?,
    };
    let m = snap_integer(alpha).unwrap_or(m);
    match m {
        1 => first_difference(&psi, dt),
        _ => second_difference(&psi, dt),
    }
}

/// Riemann-Liouville derivative `(d/dt)^m I^{m - alpha} phi`, `alpha in (0, 2)`.
pub fn rl_derivative(phi: &GridFunction, alpha: f64) -> Result<GridFunction> {
    let values = rl_values(&phi.values, phi.grid.dt(), alpha)?;
    Ok(GridFunction { grid: phi.grid, values })
}

/// Caputo derivative: the RL derivative of `phi` minus its Taylor head at 0.
pub fn caputo_derivative(phi: &GridFunction, alpha: f64) -> Result<GridFunction> {
    let m = check_order(alpha)?;
    let m = snap_integer(alpha).unwrap_or(m);
    let dt = phi.grid.dt();
    let v = &phi.values;
    if v.len() < m + 2 {
        return Err(Error::Shape(format!("Caputo derivative of order {alpha} needs {} nodes", m + 2)));
    }
    let v0 = v[0];
    let slope = if m >= 2 { (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt) } else { 0.0 };
    let shifted: Vec<f64> =
        v.iter().enumerate().map(|(i, x)| x - v0 - slope * phi.grid.node(i)).collect();
    let values = rl_values(&shifted, dt, alpha)?;
    Ok(GridFunction { grid: phi.grid, values })
}

/// Discrete `L_p` norm with cell weights (trapezoidal).
pub fn lp_norm_grid(values: &[f64], dt: f64, p: f64) -> f64 {
    let n = values.len();
    let mut s = 0.0;
    for (i, v) in values.iter().enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        s += w * v.abs().powf(p);
    }
    (s * dt).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma_fn;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(1.0, n).unwrap()
    }

    #[test]
    fn integral_of_one_is_t() {
        let g = grid(10);
        let out = frac_integral(&GridFunction::from_fn(g, |_| 1.0), 1.0).unwrap();
        for (i, v) in out.values().iter().enumerate() {
            assert!((v - g.node(i)).abs() < 1e-14);
        }
    }

    #[test]
    fn integral_exact_on_linear() {
        let g = grid(16);
        let out = frac_integral(&GridFunction::from_fn(g, |t| t), 0.5).unwrap();
        let c = 1.0 / gamma_fn(2.5).unwrap();
        assert!((c - 0.752_252_778_063_675).abs() < 1e-12);
        for (i, v) in out.values().iter().enumerate() {
            let t: f64 = g.node(i);
            assert!((v - c * t.powf(1.5)).abs() < 1e-13, "i = {i}");
        }
    }

    #[test]
    fn integral_of_constant_half_order() {
        let g = grid(32);
        let out = frac_integral(&GridFunction::from_fn(g, |_| 1.0), 0.5).unwrap();
        for (i, v) in out.values().iter().enumerate() {
            let t: f64 = g.node(i);
            assert!((v - t.sqrt() / gamma_fn(1.5).unwrap()).abs() < 1e-13);
        }
        assert_eq!(out.values()[0], 0.0);
    }

    #[test]
    fn integral_rejects_nonpositive_order() {
        let f = GridFunction::from_fn(grid(4), |t| t);
        assert!(matches!(frac_integral(&f, 0.0), Err(Error::Domain(_))));
        assert!(matches!(frac_integral(&f, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn rl_derivative_examples() {
        let g = grid(200);
        let c = gamma_fn(1.5).unwrap();
        let f = GridFunction::from_fn(g, |t| t.sqrt() / c);
        let d = rl_derivative(&f, 0.5).unwrap();
        for v in &d.values()[g.steps() / 4..] {
            assert!((v - 1.0).abs() < 1e-3, "{v}");
        }
        let lin = GridFunction::from_fn(g, |t| t);
        let d = rl_derivative(&lin, 1.0).unwrap();
        assert!(d.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        // D^{1/2} of a constant is c t^{-1/2} / Gamma(1/2)
        let k = GridFunction::from_fn(g, |_| 2.0);
        let d = rl_derivative(&k, 0.5).unwrap();
        let g05 = gamma_fn(0.5).unwrap();
        for i in (g.steps() / 4)..g.len() {
            let t: f64 = g.node(i);
            let want = 2.0 / (t.sqrt() * g05);
            assert!((d.values()[i] - want).abs() < 1e-3 * want, "i = {i}");
        }
    }

    #[test]
    fn caputo_examples() {
        let g = grid(100);
        let k = GridFunction::from_fn(g, |_| 3.0);
        for a in [0.3, 1.0, 1.6] {
            let d = caputo_derivative(&k, a).unwrap();
            assert!(d.values().iter().all(|v| v.abs() < 1e-12), "alpha = {a}");
        }
        let lin = GridFunction::from_fn(g, |t| t);
        let d = caputo_derivative(&lin, 1.4).unwrap();
        assert!(d.values().iter().all(|v| v.abs() < 1e-10));
        let a = 0.4;
        let d = caputo_derivative(&lin, a).unwrap();
        let c = 1.0 / gamma_fn(2.0 - a).unwrap();
        for i in 5..g.len() {
            let t: f64 = g.node(i);
            assert!((d.values()[i] - c * t.powf(1.0 - a)).abs() < 1e-3, "i = {i}");
        }
    }

    #[test]
    fn near_integer_orders_route_to_classical() {
        let g = grid(50);
        let f = GridFunction::from_fn(g, |t| t * t);
        let a = frac_integral(&f, 1.0 + 1e-13).unwrap();
        let b = frac_integral(&f, 1.0).unwrap();
        assert_eq!(a, b);
        let d = rl_derivative(&f, 1.0 - 5e-13).unwrap();
        let e = rl_derivative(&f, 1.0).unwrap();
        assert_eq!(d, e);
    }

    #[test]
    fn short_grid_is_a_shape_error() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        let f = GridFunction::from_fn(g, |t| t);
        assert!(matches!(rl_derivative(&f, 1.5), Err(Error::Shape(_))));
        assert!(TimeGrid::new(1.0, 1).is_err());
    }
}

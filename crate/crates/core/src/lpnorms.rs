//! Littlewood-Paley bands and the `L_p`, `H^gamma_p` and `B^s_p` norms on
//! torus grids.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{spectral_multiplier, Multiplier};
use crate::torus::{Field, TorusGrid};

/// Smooth bump supported on `1/2 < r < 2`.
pub fn bump(r: f64) -> f64 {
    if !(r > 0.0) {
        return 0.0;
    }
    let s = r.log2();
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Base window `Psi(r) = bump(r) / sum_k bump(2^{-k} r)`.
pub fn base_window(r: f64) -> f64 {
    let b = bump(r);
    if b == 0.0 {
        return 0.0;
    }
    let s = r.log2().floor() as i32;
    let norm: f64 = (s - 1..=s + 1).map(|k| bump(r * 2f64.powi(-k))).sum();
    b / norm
}

/// Band windows tabulated per radial class of a grid.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: TorusGrid,
    class_of: Vec<usize>,
    /// `windows[j][class]`
    windows: Vec<Vec<f64>>,
}

impl DyadicPartition {
    /// Bands `0..=J`, `J` the last band whose window touches a grid frequency.
    pub fn build(grid: &TorusGrid) -> Result<Self> {
        let (classes, class_of) = grid.radial_classes();
        let dxi = grid.dxi();
        let radii: Vec<f64> = classes.iter().map(|&m| dxi * (m as f64).sqrt()).collect();
        let r_max = radii.last().copied().unwrap_or(0.0);
        // band j is nonzero on 2^{j-1} < |xi| < 2^{j+1}
        let top = r_max.log2().ceil() as i64;
        if top < 2 {
            return Err(Error::Resolution(format!(
                "grid resolves |xi| <= {r_max:.3}; at least 3 dyadic bands need |xi| > 2"
            )));
        }
        let j_max = top as usize;
        let mut windows = vec![vec![0.0; radii.len()]; j_max + 1];
        for (c, &r) in radii.iter().enumerate() {
            let mut high = 0.0;
            for (j, band) in windows.iter_mut().enumerate().skip(1) {
                let w = base_window(r / 2f64.powi(j as i32));
                band[c] = w;
                high += w;
            }
            windows[0][c] = if r >= 2.0 { 0.0 } else { (1.0 - high).clamp(0.0, 1.0) };
        }
        Ok(Self { grid: *grid, class_of, windows })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// Highest band index `J`.
    pub fn top_band(&self) -> usize {
        self.windows.len() - 1
    }

    pub fn band_count(&self) -> usize {
        self.windows.len()
    }

    /// Window value of band `j` at spectral index `idx`.
    pub fn window(&self, j: usize, idx: usize) -> f64 {
        self.windows[j][self.class_of[idx]]
    }

    fn check_band(&self, j: usize) -> Result<()> {
        if j > self.top_band() {
            return Err(Error::Shape(format!("band {j} out of range 0..={}", self.top_band())));
        }
        Ok(())
    }

    fn check_field(&self, f: &Field) -> Result<()> {
        if f.grid() != self.grid {
            return Err(Error::Shape("field grid differs from partition grid".into()));
        }
        Ok(())
    }

    /// `Psi_j * f`.
    pub fn band_project(&self, f: &Field, j: usize) -> Result<Field> {
        self.check_band(j)?;
        self.check_field(f)?;
        self.project_spectrum(&f.spectrum(), j)
    }

    fn project_spectrum(&self, spec: &[Complex64], j: usize) -> Result<Field> {
        let band: Vec<Complex64> =
            spec.iter().enumerate().map(|(i, c)| c * self.windows[j][self.class_of[i]]).collect();
        Field::from_spectrum(self.grid, &band)
    }

    /// All band projections `f_0, ..., f_J` from a single forward transform.
    pub fn bands(&self, f: &Field) -> Result<Vec<Field>> {
        self.check_field(f)?;
        let spec = f.spectrum();
        (0..self.band_count()).map(|j| self.project_spectrum(&spec, j)).collect()
    }

    /// Band norms `||f_j||_{L_p}`, `j = 0..=J`.
    pub fn band_norms(&self, f: &Field, p: f64) -> Result<Vec<f64>> {
        Ok(self.bands(f)?.iter().map(|b| b.lp_norm(p)).collect())
    }
}

/// Function space of a norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "space", content = "index")]
pub enum Space {
    Lp,
    Sobolev(f64),
    Besov(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub space: Space,
    pub p: f64,
}

impl NormSpec {
    pub fn new(space: Space, p: f64) -> Result<Self> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::Parameter(format!("integrability p = {p} must lie in [2, inf)")));
        }
        Ok(Self { space, p })
    }
}

/// Norm of `f` in the given space.
pub fn norm(f: &Field, spec: &NormSpec, partition: &DyadicPartition) -> Result<f64> {
    let p = spec.p;
    match spec.space {
        Space::Lp => Ok(f.lp_norm(p)),
        Space::Sobolev(g) => Ok(spectral_multiplier(f, Multiplier::Bessel(g)).lp_norm(p)),
        Space::Besov(s) => Ok(besov_from_bands(&partition.band_norms(f, p)?, s, p)),
    }
}

/// `||f_0|| + (sum_{j>=1} 2^{spj} ||f_j||^p)^{1/p}` from precomputed band norms.
pub fn besov_from_bands(band_norms: &[f64], s: f64, p: f64) -> f64 {
    let tail: f64 = band_norms
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, n)| 2f64.powf(s * p * j as f64) * n.powf(p))
        .sum();
    band_norms[0] + tail.powf(1.0 / p)
}

/// `||u||_{H^gamma_p} / (||u_0||_{L_p} + ||(sum_{j>=1} 2^{2 gamma j} |u_j|^2)^{1/2}||_{L_p})`.
pub fn check_equivalence(f: &Field, gamma: f64, p: f64, partition: &DyadicPartition) -> Result<f64> {
    NormSpec::new(Space::Lp, p)?;
    let bands = partition.bands(f)?;
    let grid = f.grid();
    let mut square = vec![0.0; grid.len()];
    for (j, b) in bands.iter().enumerate().skip(1) {
        let w = 2f64.powf(2.0 * gamma * j as f64);
        for (s, v) in square.iter_mut().zip(b.values()) {
            *s += w * v * v;
        }
    }
    let sq = Field::new(grid, square.into_iter().map(f64::sqrt).collect())?;
    let den = bands[0].lp_norm(p) + sq.lp_norm(p);
    let num = spectral_multiplier(f, Multiplier::Bessel(gamma)).lp_norm(p);
    if den == 0.0 {
        return Ok(if num == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> TorusGrid {
        TorusGrid::new(1, 64, 2.0 * PI).unwrap()
    }

    #[test]
    fn partition_of_unity_on_grid() {
        let g = TorusGrid::new(2, 32, 2.0 * PI).unwrap();
        let part = DyadicPartition::build(&g).unwrap();
        for idx in 0..g.len() {
            let s: f64 = (0..part.band_count()).map(|j| part.window(j, idx)).sum();
            assert!((s - 1.0).abs() < 1e-12, "idx {idx}: {s}");
            for j in 0..part.band_count() {
                let w = part.window(j, idx);
                assert!((0.0..=1.0).contains(&w));
            }
        }
    }

    #[test]
    fn unit_frequency_uses_bands_zero_and_one() {
        let part = DyadicPartition::build(&grid()).unwrap();
        assert!((part.window(0, 1) + part.window(1, 1) - 1.0).abs() < 1e-15);
        for j in 2..part.band_count() {
            assert_eq!(part.window(j, 1), 0.0);
        }
    }

    #[test]
    fn dilation_relation() {
        for r in [0.7, 1.3, 2.9, 5.5] {
            assert!((base_window(2.0 * r / 2f64.powi(3)) - base_window(r / 2f64.powi(2))).abs() < 1e-15);
        }
    }

    #[test]
    fn too_coarse_grid_is_rejected() {
        let g = TorusGrid::new(1, 8, 40.0).unwrap();
        assert!(matches!(DyadicPartition::build(&g), Err(Error::Resolution(_))));
    }

    #[test]
    fn reconstruction_and_constant_field() {
        let g = grid();
        let part = DyadicPartition::build(&g).unwrap();
        let f = Field::from_fn(g, |x| (x[0].sin() * 1.7).exp() + (13.0 * x[0]).cos());
        let mut sum = Field::zeros(g);
        for b in part.bands(&f).unwrap() {
            sum.axpy(1.0, &b).unwrap();
        }
        assert!(sum.max_diff(&f).unwrap() < 1e-12);
        let c = Field::from_fn(g, |_| 2.5);
        let b0 = part.band_project(&c, 0).unwrap();
        assert!(b0.max_diff(&c).unwrap() < 1e-13);
        assert!(part.band_project(&c, 1).unwrap().max_abs() < 1e-13);
        assert!(part.band_project(&c, part.top_band() + 1).is_err());
    }

    #[test]
    fn norm_examples() {
        let g = grid();
        let part = DyadicPartition::build(&g).unwrap();
        let f = Field::from_fn(g, |x| x[0].cos() + 0.3 * (5.0 * x[0]).sin());
        let lp = norm(&f, &NormSpec::new(Space::Lp, 3.0).unwrap(), &part).unwrap();
        let h0 = norm(&f, &NormSpec::new(Space::Sobolev(0.0), 3.0).unwrap(), &part).unwrap();
        assert!((lp - h0).abs() < 1e-12 * lp);
        let one = Field::from_fn(g, |_| 1.0);
        let n = norm(&one, &NormSpec::new(Space::Lp, 4.0).unwrap(), &part).unwrap();
        assert!((n - (2.0 * PI).powf(0.25)).abs() < 1e-12);
        assert!(NormSpec::new(Space::Lp, 1.5).is_err());
    }

    #[test]
    fn constant_field_equivalence_ratio_is_one() {
        let g = grid();
        let part = DyadicPartition::build(&g).unwrap();
        let c = Field::from_fn(g, |_| -0.7);
        assert!((check_equivalence(&c, 1.0, 2.0, &part).unwrap() - 1.0).abs() < 1e-12);
    }
}

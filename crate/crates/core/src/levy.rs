//! Driving noises: compound-Poisson jump processes with mean-zero jump laws,
//! Brownian increments, step integrands and the trigonometric white-noise
//! expansion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraccalc::TimeGrid;
use crate::quad::gauss_legendre;
use crate::torus::{Field, TorusGrid};

/// Truncation of the Gaussian jump law, in standard deviations.
pub const GAUSS_TRUNCATION: f64 = 3.0;

/// Generator for `stream` under a master seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn jump_stream(copy: usize) -> u64 {
    2 * copy as u64
}

fn wiener_stream(copy: usize) -> u64 {
    2 * copy as u64 + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpLaw {
    /// Each coordinate is `+sigma` or `-sigma` with probability 1/2.
    TwoPoint,
    /// Each coordinate uniform on `[-sigma, sigma]`.
    Uniform,
    /// Each coordinate centred normal with deviation `sigma`, truncated at
    /// `GAUSS_TRUNCATION * sigma`.
    TruncatedGaussian,
}

/// Finite-activity pure-jump Levy process: intensity, jump law, and `K`
/// independent copies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevySpec {
    pub lambda: f64,
    pub law: JumpLaw,
    pub sigma: f64,
    pub d1: usize,
    #[serde(rename = "K", alias = "copies")]
    pub copies: usize,
}

impl LevySpec {
    pub fn new(lambda: f64, law: JumpLaw, sigma: f64, d1: usize, copies: usize) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Parameter(format!("jump intensity lambda = {lambda} must be positive")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Parameter(format!("jump scale sigma = {sigma} must be positive")));
        }
        if d1 == 0 {
            return Err(Error::Parameter("jump dimension d1 must be >= 1".into()));
        }
        if copies == 0 {
            return Err(Error::Parameter("number of copies K must be >= 1".into()));
        }
        Ok(Self { lambda, law, sigma, d1, copies })
    }

    fn sample_coordinate<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.law {
            JumpLaw::TwoPoint => {
                if rng.random::<bool>() {
                    self.sigma
                } else {
                    -self.sigma
                }
            }
            JumpLaw::Uniform => self.sigma * (2.0 * rng.random::<f64>() - 1.0),
            JumpLaw::TruncatedGaussian => {
                let normal = Normal::new(0.0, self.sigma).expect("positive sigma");
                loop {
                    let z: f64 = normal.sample(rng);
                    if z.abs() <= GAUSS_TRUNCATION * self.sigma {
                        return z;
                    }
                }
            }
        }
    }
}

/// Jump times in `(0, T]` and jump vectors of one copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpPath {
    times: Vec<f64>,
    sizes: Vec<f64>,
    d1: usize,
    horizon: f64,
}

impl JumpPath {
    /// Path from explicit jumps; `sizes` holds `d1` entries per jump.
    pub fn from_jumps(times: Vec<f64>, sizes: Vec<f64>, d1: usize, horizon: f64) -> Result<Self> {
        if d1 == 0 || sizes.len() != times.len() * d1 {
            return Err(Error::Shape(format!(
                "{} jump times need {} sizes, got {}",
                times.len(),
                times.len() * d1,
                sizes.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Shape("jump times must be strictly increasing".into()));
        }
        if times.iter().any(|&t| !(t > 0.0 && t <= horizon)) {
            return Err(Error::Shape(format!("jump times must lie in (0, {horizon}]")));
        }
        Ok(Self { times, sizes, d1, horizon })
    }

    pub fn empty(d1: usize, horizon: f64) -> Self {
        Self { times: Vec::new(), sizes: Vec::new(), d1, horizon }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn count(&self) -> usize {
        self.times.len()
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Jump vector of the `i`-th jump.
    pub fn jump(&self, i: usize) -> &[f64] {
        &self.sizes[i * self.d1..(i + 1) * self.d1]
    }

    /// `Z_t`, coordinate `r`.
    pub fn value(&self, t: f64, r: usize) -> f64 {
        (0..self.count()).take_while(|&i| self.times[i] <= t).map(|i| self.jump(i)[r]).sum()
    }

    /// Union of two paths with disjoint jump times.
    pub fn merged(&self, other: &JumpPath) -> Result<JumpPath> {
        if self.d1 != other.d1 {
            return Err(Error::Shape("cannot merge paths of different jump dimension".into()));
        }
        let mut all: Vec<(f64, &[f64])> = (0..self.count())
            .map(|i| (self.times[i], self.jump(i)))
            .chain((0..other.count()).map(|i| (other.times[i], other.jump(i))))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        let times = all.iter().map(|x| x.0).collect();
        let sizes = all.iter().flat_map(|x| x.1.iter().copied()).collect();
        JumpPath::from_jumps(times, sizes, self.d1, self.horizon.max(other.horizon))
    }
}

/// Samples copy `copy` of the process on `(0, T]`.
pub fn sample_jump_path(spec: &LevySpec, horizon: f64, seed: u64, copy: usize) -> Result<JumpPath> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon T = {horizon} must be positive")));
    }
    let mut rng = stream_rng(seed, jump_stream(copy));
    let poisson = Poisson::new(spec.lambda * horizon)
        .map_err(|e| Error::Parameter(format!("Poisson mean: {e}")))?;
    let count = poisson.sample(&mut rng) as usize;
    Ok(fill_path(spec, horizon, count, &mut rng))
}

/// Like [`sample_jump_path`] but with a prescribed number of jumps.
pub fn sample_jump_path_with_count(
    spec: &LevySpec,
    horizon: f64,
    seed: u64,
    copy: usize,
    count: usize,
) -> Result<JumpPath> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon T = {horizon} must be positive")));
    }
    let mut rng = stream_rng(seed, jump_stream(copy));
    Ok(fill_path(spec, horizon, count, &mut rng))
}

fn fill_path<R: Rng>(spec: &LevySpec, horizon: f64, count: usize, rng: &mut R) -> JumpPath {
    let mut times: Vec<f64> = (0..count).map(|_| horizon * (1.0 - rng.random::<f64>())).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let sizes = (0..times.len() * spec.d1).map(|_| spec.sample_coordinate(rng)).collect();
    JumpPath { times, sizes, d1: spec.d1, horizon }
}

/// `m_p = (int |z|^p nu(dz))^{1/p}` with `nu = lambda * law`.
pub fn moment_mp(spec: &LevySpec, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::Parameter(format!("moment order p = {p} must be >= 2")));
    }
    let s = spec.sigma;
    let d1 = spec.d1 as f64;
    let abs_moment = match (spec.law, spec.d1) {
        (JumpLaw::TwoPoint, _) => (s * d1.sqrt()).powf(p),
        (JumpLaw::Uniform, 1) => s.powf(p) / (p + 1.0),
        _ => quadrature_moment(spec, p)?,
    };
    Ok((spec.lambda * abs_moment).powf(1.0 / p))
}

/// `E|z|^p` by tensor Gauss-Legendre quadrature, split at the origin.
fn quadrature_moment(spec: &LevySpec, p: f64) -> Result<f64> {
    if spec.d1 > 3 {
        return Err(Error::Parameter(format!(
            "quadrature moments support d1 <= 3, got {}",
            spec.d1
        )));
    }
    let half = match spec.law {
        JumpLaw::TruncatedGaussian => GAUSS_TRUNCATION * spec.sigma,
        _ => spec.sigma,
    };
    let density = |z: f64| match spec.law {
        JumpLaw::TruncatedGaussian => (-0.5 * (z / spec.sigma).powi(2)).exp(),
        _ => 1.0,
    };
    let (x, w) = gauss_legendre(48);
    let mut nodes = Vec::with_capacity(96);
    for (xi, wi) in x.iter().zip(&w) {
        // two panels [-half, 0] and [0, half]
        for c in [-0.5 * half, 0.5 * half] {
            let z = c + 0.5 * half * xi;
            nodes.push((z, 0.5 * half * wi * density(z)));
        }
    }
    let d = spec.d1;
    let mut num = 0.0;
    let mut den = 0.0;
    let total = nodes.len().pow(d as u32);
    for idx in 0..total {
        let mut rest = idx;
        let mut r2 = 0.0;
        let mut weight = 1.0;
        for _ in 0..d {
            let (z, wz) = nodes[rest % nodes.len()];
            rest /= nodes.len();
            r2 += z * z;
            weight *= wz;
        }
        num += weight * r2.powf(0.5 * p);
        den += weight;
    }
    Ok(num / den)
}

/// Left-continuous step function: `values[i]` on `(breaks[i], breaks[i+1]]`,
/// zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFn {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFn {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::Shape("step function needs one more break than values".into()));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Shape("step breaks must be strictly increasing".into()));
        }
        Ok(Self { breaks, values })
    }

    /// `c` on `(0, T]`.
    pub fn constant(c: f64, horizon: f64) -> Self {
        Self { breaks: vec![0.0, horizon], values: vec![c] }
    }

    /// Indicator of `(a, b]`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![1.0])
    }

    /// Value at `s`, equal to the left limit `h(s-)`.
    pub fn eval(&self, s: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b < s);
        if i == 0 || i >= self.breaks.len() {
            return 0.0;
        }
        self.values[i - 1]
    }

    /// Right limit `h(s+)`, the value on the step starting at `s`.
    pub fn eval_right(&self, s: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b <= s);
        if i == 0 || i >= self.breaks.len() {
            return 0.0;
        }
        self.values[i - 1]
    }

    /// `int_0^T |h|^p dt`.
    pub fn lp_pow(&self, p: f64) -> f64 {
        self.values.iter().zip(self.breaks.windows(2)).map(|(v, w)| v.abs().powf(p) * (w[1] - w[0])).sum()
    }
}

/// `[M]_t = sum_{s_i <= t} (sum_r h^r(s_i-) dZ^r_i)^2` for one copy.
pub fn quad_variation(h: &[StepFn], path: &JumpPath, t: f64) -> Result<f64> {
    check_components(h, path)?;
    Ok((0..path.count())
        .take_while(|&i| path.times[i] <= t)
        .map(|i| jump_increment(h, path, i).powi(2))
        .sum())
}

fn check_components(h: &[StepFn], path: &JumpPath) -> Result<()> {
    if h.len() != path.d1 {
        return Err(Error::Shape(format!(
            "integrand has {} components, path has d1 = {}",
            h.len(),
            path.d1
        )));
    }
    Ok(())
}

fn jump_increment(h: &[StepFn], path: &JumpPath, i: usize) -> f64 {
    let s = path.times[i];
    h.iter().zip(path.jump(i)).map(|(hr, z)| hr.eval(s) * z).sum()
}

/// `int_0^t h(s-) . dZ_s` at each of `times`.
pub fn stochastic_integral_jump(h: &[StepFn], path: &JumpPath, times: &[f64]) -> Result<Vec<f64>> {
    check_components(h, path)?;
    Ok(times
        .iter()
        .map(|&t| {
            (0..path.count()).take_while(|&i| path.times[i] <= t).map(|i| jump_increment(h, path, i)).sum()
        })
        .collect())
}

/// Brownian increments on a uniform grid for `K` independent copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerPath {
    grid: TimeGrid,
    increments: Vec<Vec<f64>>,
}

impl WienerPath {
    pub fn new(grid: TimeGrid, increments: Vec<Vec<f64>>) -> Result<Self> {
        if increments.iter().any(|v| v.len() != grid.steps()) {
            return Err(Error::Shape("each copy needs one increment per step".into()));
        }
        Ok(Self { grid, increments })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn copies(&self) -> usize {
        self.increments.len()
    }

    pub fn increments(&self, copy: usize) -> &[f64] {
        &self.increments[copy]
    }

    /// Path on a grid with `factor` times fewer steps, summing increments.
    pub fn coarsened(&self, factor: usize) -> Result<WienerPath> {
        let n = self.grid.steps();
        if factor == 0 || !n.is_multiple_of(factor) || n / factor < 2 {
            return Err(Error::Shape(format!("cannot coarsen {n} steps by {factor}")));
        }
        let grid = TimeGrid::new(self.grid.tmax(), n / factor)?;
        let increments =
            self.increments.iter().map(|v| v.chunks(factor).map(|c| c.iter().sum()).collect()).collect();
        Ok(WienerPath { grid, increments })
    }

    /// Same increments rescaled by `c`.
    pub fn scaled(&self, c: f64, grid: TimeGrid) -> Result<WienerPath> {
        WienerPath::new(grid, self.increments.iter().map(|v| v.iter().map(|x| c * x).collect()).collect())
    }
}

/// Samples `copies` independent Brownian motions on `grid`.
pub fn sample_wiener(grid: TimeGrid, copies: usize, seed: u64) -> WienerPath {
    let sd = grid.dt().sqrt();
    let normal = Normal::new(0.0, sd).expect("positive step");
    let increments = (0..copies)
        .map(|k| {
            let mut rng = stream_rng(seed, wiener_stream(k));
            (0..grid.steps()).map(|_| normal.sample(&mut rng)).collect()
        })
        .collect();
    WienerPath { grid, increments }
}

/// `sum_{t_{j+1} <= t_n} h(t_j+) dW_j` at every node of the path grid.
pub fn stochastic_integral_wiener(h: &StepFn, path: &WienerPath, copy: usize) -> Vec<f64> {
    let grid = path.grid;
    let mut out = vec![0.0; grid.len()];
    for j in 0..grid.steps() {
        out[j + 1] = out[j] + h.eval_right(grid.node(j)) * path.increments[copy][j];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    Constant,
    Cos,
    Sin,
}

/// Real trigonometric basis function `eta(x)` on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisFn {
    pub wave: [i64; 3],
    pub kind: BasisKind,
}

impl BasisFn {
    pub fn field(&self, grid: &TorusGrid) -> Field {
        let vol = grid.volume();
        let dxi = grid.dxi();
        let d = grid.dim();
        Field::from_fn(*grid, |x| {
            let phase: f64 = (0..d).map(|a| dxi * self.wave[a] as f64 * x[a]).sum();
            match self.kind {
                BasisKind::Constant => 1.0 / vol.sqrt(),
                BasisKind::Cos => (2.0 / vol).sqrt() * phase.cos(),
                BasisKind::Sin => (2.0 / vol).sqrt() * phase.sin(),
            }
        })
    }
}

/// First `k` functions of the orthonormal real trigonometric basis, ordered
/// by `|m|^2`; Nyquist wave numbers are excluded.
pub fn trig_basis(grid: &TorusGrid, k: usize) -> Result<Vec<BasisFn>> {
    let d = grid.dim();
    let half = grid.modes() as i64 / 2;
    let mut waves: Vec<[i64; 3]> = Vec::new();
    let range = -(half - 1)..half;
    let mut stack = vec![[0i64; 3]];
    for axis in 0..d {
        let mut next = Vec::new();
        for w in &stack {
            for m in range.clone() {
                let mut v = *w;
                v[axis] = m;
                next.push(v);
            }
        }
        stack = next;
    }
    for w in stack {
        // keep one representative of each +/- pair: first nonzero component positive
        if let Some(first) = w[..d].iter().find(|&&m| m != 0) {
            if *first > 0 {
                waves.push(w);
            }
        }
    }
    waves.sort_by_key(|w| (w.iter().map(|m| m * m).sum::<i64>(), *w));
    let mut basis = vec![BasisFn { wave: [0; 3], kind: BasisKind::Constant }];
    for w in waves {
        basis.push(BasisFn { wave: w, kind: BasisKind::Cos });
        basis.push(BasisFn { wave: w, kind: BasisKind::Sin });
    }
    if k > basis.len() {
        return Err(Error::Resolution(format!(
            "white-noise basis size K = {k} exceeds the {} resolvable functions",
            basis.len()
        )));
    }
    basis.truncate(k);
    Ok(basis)
}

/// Truncated expansion `sum_k eta^k(x) dZ^k_s` of space-time Levy noise.
#[derive(Debug, Clone)]
pub struct WhiteNoise {
    pub grid: TorusGrid,
    pub basis: Vec<BasisFn>,
    pub fields: Vec<Field>,
    pub paths: Vec<JumpPath>,
}

/// Pairs the first `k` basis functions with independent jump paths
/// (copies `0..k` of `spec` with `d1 = 1`).
pub fn white_noise_field(spec: &LevySpec, k: usize, grid: &TorusGrid, horizon: f64, seed: u64) -> Result<WhiteNoise> {
    if spec.d1 != 1 {
        return Err(Error::Parameter("white noise uses scalar jumps (d1 = 1)".into()));
    }
    let basis = trig_basis(grid, k)?;
    let fields = basis.iter().map(|b| b.field(grid)).collect();
    let paths = (0..k).map(|c| sample_jump_path(spec, horizon, seed, c)).collect::<Result<_>>()?;
    Ok(WhiteNoise { grid: *grid, basis, fields, paths })
}

impl WhiteNoise {
    /// Noise with explicitly given paths (one per basis function).
    pub fn with_paths(grid: &TorusGrid, paths: Vec<JumpPath>) -> Result<Self> {
        let basis = trig_basis(grid, paths.len())?;
        let fields = basis.iter().map(|b| b.field(grid)).collect();
        Ok(Self { grid: *grid, basis, fields, paths })
    }

    /// `int_0^T int X(s, x) Zdot(dx ds) = sum_k sum_i <X(s_i), eta^k> dZ^k_i`,
    /// with `x_at(s)` returning the left-continuous field `X(s-, .)`.
    pub fn integrate(&self, x_at: impl Fn(f64) -> Field) -> Result<f64> {
        let mut total = 0.0;
        for (eta, path) in self.fields.iter().zip(&self.paths) {
            for i in 0..path.count() {
                let x = x_at(path.times[i]);
                if x.grid() != self.grid {
                    return Err(Error::Shape("test function grid differs from noise grid".into()));
                }
                let inner: f64 =
                    x.values().iter().zip(eta.values()).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_volume();
                total += inner * path.jump(i)[0];
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(law: JumpLaw) -> LevySpec {
        LevySpec::new(3.0, law, 1.0, 1, 1).unwrap()
    }

    #[test]
    fn forced_single_jump() {
        let s = LevySpec::new(1e-6, JumpLaw::TwoPoint, 1.0, 1, 1).unwrap();
        let path = sample_jump_path_with_count(&s, 1.0, 7, 0, 1).unwrap();
        assert_eq!(path.count(), 1);
        let tau = path.times()[0];
        assert_eq!(path.value(tau - 1e-12, 0), 0.0);
        assert_eq!(path.value(1.0, 0).abs(), 1.0);
    }

    #[test]
    fn moment_examples() {
        let two = LevySpec::new(2.5, JumpLaw::TwoPoint, 1.0, 1, 1).unwrap();
        for p in [2.0, 3.0, 4.0] {
            assert!((moment_mp(&two, p).unwrap() - 2.5f64.powf(1.0 / p)).abs() < 1e-14);
        }
        let uni = LevySpec::new(2.0, JumpLaw::Uniform, 1.0, 1, 1).unwrap();
        assert!((moment_mp(&uni, 2.0).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        // quadrature route on the same law
        assert!((quadrature_moment(&uni, 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-13);
        let uni2 = LevySpec::new(1.0, JumpLaw::Uniform, 1.0, 2, 1).unwrap();
        // E|z|^2 = 2/3 for two independent uniform coordinates
        assert!((moment_mp(&uni2, 2.0).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(moment_mp(&spec(JumpLaw::Uniform), 1.5).is_err());
    }

    #[test]
    fn quad_variation_examples() {
        let path = JumpPath::from_jumps(vec![0.3, 0.7], vec![1.0, -2.0], 1, 1.0).unwrap();
        let one = [StepFn::constant(1.0, 1.0)];
        assert_eq!(quad_variation(&one, &path, 1.0).unwrap(), 5.0);
        let zero = [StepFn::constant(0.0, 1.0)];
        assert_eq!(quad_variation(&zero, &path, 1.0).unwrap(), 0.0);
        let ind = [StepFn::indicator(0.5, 1.0).unwrap()];
        assert_eq!(quad_variation(&ind, &path, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn stochastic_integral_examples() {
        let path = JumpPath::from_jumps(vec![0.2, 0.5, 0.9], vec![1.0, -0.5, 2.0], 1, 1.0).unwrap();
        let times = [0.1, 0.2, 0.6, 1.0];
        let z = stochastic_integral_jump(&[StepFn::constant(1.0, 1.0)], &path, &times).unwrap();
        for (t, v) in times.iter().zip(&z) {
            assert_eq!(*v, path.value(*t, 0));
        }
        let ind = stochastic_integral_jump(&[StepFn::indicator(0.3, 0.95).unwrap()], &path, &[1.0]).unwrap();
        assert_eq!(ind[0], path.value(0.95, 0) - path.value(0.3, 0));
    }

    #[test]
    fn step_function_limits() {
        let h = StepFn::new(vec![0.0, 0.5, 1.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(h.eval(0.5), 1.0);
        assert_eq!(h.eval_right(0.5), 3.0);
        assert_eq!(h.eval(0.0), 0.0);
        assert_eq!(h.eval_right(0.0), 1.0);
        assert_eq!(h.eval(1.2), 0.0);
        assert!((h.lp_pow(2.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn wiener_coarsening_sums_increments() {
        let g = TimeGrid::new(1.0, 16).unwrap();
        let w = sample_wiener(g, 2, 11);
        let c = w.coarsened(4).unwrap();
        assert_eq!(c.grid().steps(), 4);
        let direct: f64 = w.increments(1)[4..8].iter().sum();
        assert_eq!(c.increments(1)[1], direct);
    }

    #[test]
    fn basis_is_orthonormal() {
        let g = TorusGrid::new(2, 8, 3.0).unwrap();
        let basis = trig_basis(&g, 9).unwrap();
        let fields: Vec<Field> = basis.iter().map(|b| b.field(&g)).collect();
        for (i, a) in fields.iter().enumerate() {
            for (j, b) in fields.iter().enumerate() {
                let ip: f64 = a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<f64>() * g.cell_volume();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-12, "({i}, {j}) -> {ip}");
            }
        }
        assert!(trig_basis(&g, 1000).is_err());
    }
}

//! Mild solutions of `d^alpha_t u = Delta u + f + d^{beta1}_t int g dW + d^{beta2}_t int h . dZ`
//! on the torus, computed mode by mode.
//!
//! Deterministic forcing is integrated exactly against its piecewise-linear
//! interpolant in time; the jump convolution is an exact finite sum over jump
//! events; the Wiener convolution uses left-point kernel values per step.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraccalc::TimeGrid;
use crate::levy::{sample_jump_path, sample_wiener, white_noise_field, JumpPath, LevySpec, WienerPath};
use crate::params::{dimension_gate, GateAudit, ProblemParams};
use crate::specfun::{shared_table, MLParams, MlTable};
use crate::torus::{Field, TorusGrid};

/// Space-time function given as `t -> u(t, .)`.
pub type SpaceTimeFn = Arc<dyn Fn(f64) -> Field + Send + Sync>;

/// Pointwise map `(t, x, u) -> value`.
pub type PointMap = Arc<dyn Fn(f64, &[f64], f64) -> f64 + Send + Sync>;

/// Pointwise nonlinearity with its declared Lipschitz constant in `u`.
#[derive(Clone)]
pub struct Nonlinearity {
    pub map: PointMap,
    pub lipschitz: f64,
}

impl Nonlinearity {
    pub fn new(lipschitz: f64, map: impl Fn(f64, &[f64], f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(lipschitz >= 0.0) || !lipschitz.is_finite() {
            return Err(Error::Parameter(format!("Lipschitz constant {lipschitz} must be finite and >= 0")));
        }
        Ok(Self { map: Arc::new(map), lipschitz })
    }

    fn apply(&self, t: f64, u: &Field) -> Field {
        let grid = u.grid();
        let values = u
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.map)(t, &grid.coords(i)[..grid.dim()], v))
            .collect();
        Field::new(grid, values).expect("same grid")
    }
}

/// Frozen noise realisation: Brownian increments on the uniform time grid
/// and one jump path per jump copy.
#[derive(Debug, Clone, Default)]
pub struct Noise {
    pub wiener: Option<WienerPath>,
    pub jumps: Vec<JumpPath>,
    pub seed: Option<u64>,
}

impl Noise {
    pub fn none() -> Self {
        Self::default()
    }

    /// Samples `wiener_copies` Brownian motions on `time` and `levy.copies`
    /// jump paths, all from one master seed.
    pub fn sample(time: TimeGrid, wiener_copies: usize, levy: Option<&LevySpec>, seed: u64) -> Result<Self> {
        let wiener = (wiener_copies > 0).then(|| sample_wiener(time, wiener_copies, seed));
        let jumps = match levy {
            Some(spec) => (0..spec.copies).map(|k| sample_jump_path(spec, time.tmax(), seed, k)).collect::<Result<_>>()?,
            None => Vec::new(),
        };
        Ok(Self { wiener, jumps, seed: Some(seed) })
    }
}

/// Data of the linear problem.
#[derive(Clone)]
pub struct ProblemData {
    pub u0: Field,
    /// Initial velocity; used only when `alpha > 1`.
    pub v0: Option<Field>,
    pub f: Option<SpaceTimeFn>,
    /// `g^k`, one per Wiener copy; evaluated at the left end of each step.
    pub g: Vec<SpaceTimeFn>,
    /// `h^{rk}` indexed `[k][r]`; evaluated at `s-` for a jump at `s`.
    pub h: Vec<Vec<SpaceTimeFn>>,
}

impl ProblemData {
    pub fn initial(u0: Field) -> Self {
        Self { u0, v0: None, f: None, g: Vec::new(), h: Vec::new() }
    }
}

/// Data of the semilinear problem.
#[derive(Clone)]
pub struct SemilinearData {
    pub u0: Field,
    pub v0: Option<Field>,
    pub f: Option<Nonlinearity>,
    pub g: Vec<Nonlinearity>,
    pub h: Vec<Vec<Nonlinearity>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveKind {
    Deterministic,
    JumpConvolution,
    WienerConvolution,
    Linear,
    Semilinear,
    WhiteNoise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: SolveKind,
    pub iterations: usize,
    /// Discrete `L_p` norms of successive Picard increments.
    pub increments: Vec<f64>,
    /// Ratios of successive increments.
    pub ratios: Vec<f64>,
    pub seed: Option<u64>,
    pub gate: Option<GateAudit>,
}

impl Provenance {
    fn linear(kind: SolveKind, seed: Option<u64>) -> Self {
        Self { kind, iterations: 1, increments: Vec::new(), ratios: Vec::new(), seed, gate: None }
    }
}

/// Solution values `u(t_i, x)` on the output times, with left limits.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub grid: TorusGrid,
    pub params: ProblemParams,
    pub times: Vec<f64>,
    pub values: Vec<Field>,
    /// `u(t_i-, x)`; differs from `values` only at jump times.
    pub left: Vec<Field>,
    pub provenance: Provenance,
}

impl SolutionField {
    /// Discrete `L_p([0, T] x torus)` norm with trapezoidal weights in time.
    pub fn lp_time_norm(&self, p: f64) -> f64 {
        time_lp(&self.times, &self.values, p)
    }

    /// Index of the output time equal to `t`, if any.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| s == t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(Field::max_abs).fold(0.0, f64::max)
    }
}

fn time_lp(times: &[f64], values: &[Field], p: f64) -> f64 {
    let pow: Vec<f64> = values.iter().map(|v| v.lp_norm_pow(p)).collect();
    let mut s = 0.0;
    for i in 0..times.len().saturating_sub(1) {
        s += 0.5 * (times[i + 1] - times[i]) * (pow[i] + pow[i + 1]);
    }
    s.powf(1.0 / p)
}

/// `tau^exponent E_{a,b}(-tau^a q)` through a shared table.
struct TimeKernel {
    alpha: f64,
    exponent: f64,
    table: Arc<MlTable>,
}

impl TimeKernel {
    fn new(alpha: f64, b: f64, exponent: f64, v_max: f64) -> Result<Self> {
        Ok(Self { alpha, exponent, table: shared_table(MLParams::new(alpha, b)?, v_max)? })
    }

    fn eval(&self, tau: f64, q: f64) -> f64 {
        if tau == 0.0 {
            return if self.exponent > 0.0 {
                0.0
            } else if self.exponent == 0.0 {
                self.table.eval(0.0)
            } else {
                f64::INFINITY
            };
        }
        tau.powf(self.exponent) * self.table.eval(tau.powf(self.alpha) * q)
    }
}

/// Spectral sources of one linear solve.
#[derive(Default)]
struct Sources {
    u0: Option<Vec<Complex64>>,
    v0: Option<Vec<Complex64>>,
    /// Forcing spectra at `forcing_times`.
    forcing_times: Vec<f64>,
    forcing: Vec<Vec<Complex64>>,
    /// `sum_k g^k(t_j) dW^k_j` per uniform step.
    wiener: Vec<Vec<Complex64>>,
    /// `(s, sum_r h^r(s-) dZ^r)` per jump event, sorted by time.
    events: Vec<(f64, Vec<Complex64>)>,
}

struct Engine {
    grid: TorusGrid,
    params: ProblemParams,
    time: TimeGrid,
    q: Vec<f64>,
    class_of: Vec<usize>,
    e1: TimeKernel,
    e2: TimeKernel,
    q1: TimeKernel,
    q2: TimeKernel,
    wiener_k: TimeKernel,
    jump_k: TimeKernel,
}

/// Output of one query: the solution excluding and including jumps at `t`.
struct Query {
    left: Vec<Complex64>,
    right: Vec<Complex64>,
}

impl Engine {
    fn new(params: &ProblemParams, grid: &TorusGrid, time: TimeGrid) -> Result<Self> {
        let params = params.validated()?;
        let (classes, class_of) = grid.radial_classes();
        let dxi2 = grid.dxi().powi(2);
        let q: Vec<f64> = classes.iter().map(|&m| dxi2 * m as f64).collect();
        let a = params.alpha;
        let v_max = 1.01 * time.tmax().powf(a) * q.last().copied().unwrap_or(0.0);
        Ok(Self {
            grid: *grid,
            params,
            time,
            e1: TimeKernel::new(a, 1.0, 0.0, v_max)?,
            e2: TimeKernel::new(a, 2.0, 1.0, v_max)?,
            q1: TimeKernel::new(a, a + 1.0, a, v_max)?,
            q2: TimeKernel::new(a, a + 2.0, a + 1.0, v_max)?,
            wiener_k: TimeKernel::new(a, 1.0 + a - params.beta1, a - params.beta1, v_max)?,
            jump_k: TimeKernel::new(a, 1.0 + a - params.beta2, a - params.beta2, v_max)?,
            q,
            class_of,
        })
    }

    fn per_class(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.q.iter().map(|&q| f(q)).collect()
    }

    fn add_scaled(&self, acc: &mut [Complex64], w: &[f64], src: &[Complex64]) {
        for ((a, s), c) in acc.iter_mut().zip(src).zip(&self.class_of) {
            *a += s * w[*c];
        }
    }

    /// Duhamel contribution of the linear interpolant through `(sa, fa)`,
    /// `(sb, fb)` at time `t >= sb`.
    fn duhamel_interval(&self, acc: &mut [Complex64], t: f64, sa: f64, sb: f64, fa: &[Complex64], fb: &[Complex64]) {
        let h = sb - sa;
        let (ra, rb) = (t - sb, t - sa);
        let w1 = self.per_class(|q| self.q1.eval(rb, q) - self.q1.eval(ra, q));
        let w2 = self.per_class(|q| self.q1.eval(rb, q) - (self.q2.eval(rb, q) - self.q2.eval(ra, q)) / h);
        for (((a, a_src), b_src), c) in acc.iter_mut().zip(fa).zip(fb).zip(&self.class_of) {
            *a += b_src * w1[*c] + (a_src - b_src) * w2[*c];
        }
    }

    fn query(&self, src: &Sources, t: f64) -> Query {
        let n = self.grid.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        if let Some(u0) = &src.u0 {
            let w = self.per_class(|q| self.e1.eval(t, q));
            self.add_scaled(&mut acc, &w, u0);
        }
        if let (Some(v0), true) = (&src.v0, self.params.alpha > 1.0) {
            let w = self.per_class(|q| self.e2.eval(t, q));
            self.add_scaled(&mut acc, &w, v0);
        }
        let ft = &src.forcing_times;
        for i in 0..ft.len().saturating_sub(1) {
            let (sa, sb) = (ft[i], ft[i + 1]);
            if sb <= t {
                self.duhamel_interval(&mut acc, t, sa, sb, &src.forcing[i], &src.forcing[i + 1]);
            } else if sa < t {
                let lam = (t - sa) / (sb - sa);
                let ft_mid: Vec<Complex64> =
                    src.forcing[i].iter().zip(&src.forcing[i + 1]).map(|(a, b)| a + (b - a) * lam).collect();
                self.duhamel_interval(&mut acc, t, sa, t, &src.forcing[i], &ft_mid);
            }
        }
        let slack = 1e-12 * self.time.tmax();
        for (j, gdw) in src.wiener.iter().enumerate() {
            if self.time.node(j + 1) > t + slack {
                break;
            }
            let tj = self.time.node(j);
            let w = self.per_class(|q| self.wiener_k.eval(t - tj, q));
            self.add_scaled(&mut acc, &w, gdw);
        }
        let mut right = Vec::new();
        let mut lag0 = false;
        for (s, c) in &src.events {
            if *s < t {
                let w = self.per_class(|q| self.jump_k.eval(t - s, q));
                self.add_scaled(&mut acc, &w, c);
            } else if *s == t && self.jump_k.exponent >= 0.0 {
                if !lag0 {
                    right = acc.clone();
                    lag0 = true;
                }
                let w = self.per_class(|q| self.jump_k.eval(0.0, q));
                self.add_scaled(&mut right, &w, c);
            } else {
                break;
            }
        }
        if !lag0 {
            right = acc.clone();
        }
        Query { left: acc, right }
    }

    fn to_field(&self, spec: &[Complex64]) -> Field {
        Field::from_spectrum(self.grid, spec).expect("spectrum matches grid")
    }

    /// Values and left limits at `times`, plus left limits at `extra`.
    fn run(&self, src: &Sources, times: &[f64], extra: &[f64]) -> (Vec<Field>, Vec<Field>, Vec<Field>) {
        let main: Vec<(Field, Field)> = times
            .par_iter()
            .map(|&t| {
                let q = self.query(src, t);
                (self.to_field(&q.right), self.to_field(&q.left))
            })
            .collect();
        let extra_left: Vec<Field> = extra.par_iter().map(|&t| self.to_field(&self.query(src, t).left)).collect();
        let (values, left) = main.into_iter().unzip();
        (values, left, extra_left)
    }

    /// Jump times belong to the output grid when the instantaneous kernel
    /// value is finite (`beta2 <= alpha`).
    fn jumps_in_grid(&self) -> bool {
        self.jump_k.exponent >= 0.0
    }

    fn output_times(&self, events: &[f64]) -> Vec<f64> {
        let mut times = self.time.nodes();
        if self.jumps_in_grid() {
            times.extend_from_slice(events);
            times.sort_by(f64::total_cmp);
            times.dedup();
        }
        times
    }
}

fn check_grid(field: &Field, grid: &TorusGrid, what: &str) -> Result<()> {
    if field.grid() != *grid {
        return Err(Error::Shape(format!("{what} lives on a different torus grid")));
    }
    Ok(())
}

/// Jump events `(time, copy, index)` over copies `0..copies`, sorted by time.
fn collect_events(noise: &Noise, copies: usize) -> Result<Vec<(f64, usize, usize)>> {
    if copies > noise.jumps.len() {
        return Err(Error::Shape(format!("{copies} jump integrands but {} jump paths", noise.jumps.len())));
    }
    let mut ev: Vec<(f64, usize, usize)> = noise.jumps[..copies]
        .iter()
        .enumerate()
        .flat_map(|(k, p)| p.times().iter().enumerate().map(move |(i, &s)| (s, k, i)))
        .collect();
    ev.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(ev)
}

fn check_wiener(noise: &Noise, copies: usize, time: TimeGrid) -> Result<Option<&WienerPath>> {
    if copies == 0 {
        return Ok(None);
    }
    let w = noise.wiener.as_ref().ok_or_else(|| Error::Shape("Wiener integrands given without a Wiener path".into()))?;
    if w.copies() < copies {
        return Err(Error::Shape(format!("{copies} Wiener integrands but {} Brownian copies", w.copies())));
    }
    if w.grid() != time {
        return Err(Error::Shape("Brownian increments must live on the solver time grid".into()));
    }
    Ok(Some(w))
}

/// Evaluates the linear data into spectral sources.
fn linear_sources(
    engine: &Engine,
    data: &ProblemData,
    noise: &Noise,
    forcing_times: &[f64],
) -> Result<Sources> {
    let grid = &engine.grid;
    check_grid(&data.u0, grid, "u0")?;
    let mut src = Sources { u0: Some(data.u0.spectrum()), ..Default::default() };
    if let Some(v0) = &data.v0 {
        check_grid(v0, grid, "v0")?;
        src.v0 = Some(v0.spectrum());
    }
    if let Some(f) = &data.f {
        src.forcing_times = forcing_times.to_vec();
        src.forcing = forcing_times
            .par_iter()
            .map(|&t| {
                let v = f(t);
                check_grid(&v, grid, "f")?;
                Ok(v.spectrum())
            })
            .collect::<Result<_>>()?;
    }
    if let Some(w) = check_wiener(noise, data.g.len(), engine.time)? {
        src.wiener = (0..engine.time.steps())
            .into_par_iter()
            .map(|j| {
                let tj = engine.time.node(j);
                let mut acc = Field::zeros(*grid);
                for (k, g) in data.g.iter().enumerate() {
                    let v = g(tj);
                    check_grid(&v, grid, "g")?;
                    acc.axpy(w.increments(k)[j], &v)?;
                }
                Ok(acc.spectrum())
            })
            .collect::<Result<_>>()?;
    }
    let events = collect_events(noise, data.h.len())?;
    src.events = events
        .par_iter()
        .map(|&(s, k, i)| {
            let path = &noise.jumps[k];
            if data.h[k].len() != path.d1() {
                return Err(Error::Shape(format!("h^k needs {} components for copy {k}", path.d1())));
            }
            let mut acc = Field::zeros(*grid);
            for (hr, z) in data.h[k].iter().zip(path.jump(i)) {
                let v = hr(s);
                check_grid(&v, grid, "h")?;
                acc.axpy(*z, &v)?;
            }
            Ok((s, acc.spectrum()))
        })
        .collect::<Result<_>>()?;
    Ok(src)
}

fn event_times(noise: &Noise, copies: usize) -> Result<Vec<f64>> {
    let mut t: Vec<f64> = collect_events(noise, copies)?.into_iter().map(|e| e.0).collect();
    t.dedup();
    Ok(t)
}

fn check_horizon(noise: &Noise, time: TimeGrid) -> Result<()> {
    for p in &noise.jumps {
        if p.times().iter().any(|&s| s > time.tmax()) {
            return Err(Error::Shape("jump times exceed the solver horizon".into()));
        }
    }
    Ok(())
}

/// Solves the linear problem with frozen noise; the output times are the
/// uniform nodes plus, when `beta2 <= alpha`, every jump time of an active copy.
pub fn solve_linear(
    data: &ProblemData,
    params: &ProblemParams,
    grid: &TorusGrid,
    time: TimeGrid,
    noise: &Noise,
) -> Result<SolutionField> {
    solve_linear_as(data, params, grid, time, noise, SolveKind::Linear)
}

fn solve_linear_as(
    data: &ProblemData,
    params: &ProblemParams,
    grid: &TorusGrid,
    time: TimeGrid,
    noise: &Noise,
    kind: SolveKind,
) -> Result<SolutionField> {
    check_horizon(noise, time)?;
    let engine = Engine::new(params, grid, time)?;
    let events = event_times(noise, data.h.len())?;
    let times = engine.output_times(&events);
    let src = linear_sources(&engine, data, noise, &times)?;
    let (values, left, _) = engine.run(&src, &times, &[]);
    Ok(SolutionField {
        grid: *grid,
        params: engine.params,
        times,
        values,
        left,
        provenance: Provenance::linear(kind, noise.seed),
    })
}

/// `u0`, `v0` and `f` only.
pub fn deterministic_propagate(
    data: &ProblemData,
    params: &ProblemParams,
    grid: &TorusGrid,
    time: TimeGrid,
) -> Result<SolutionField> {
    let det = ProblemData { g: Vec::new(), h: Vec::new(), ..data.clone() };
    solve_linear_as(&det, params, grid, time, &Noise::none(), SolveKind::Deterministic)
}

/// `sum_k int q_{alpha,beta2}(t - s) * h^k(s-) . dZ^k_s` with zero initial data.
pub fn stochastic_convolution_jump(
    h: &[Vec<SpaceTimeFn>],
    params: &ProblemParams,
    grid: &TorusGrid,
    time: TimeGrid,
    paths: &[JumpPath],
) -> Result<SolutionField> {
    let data = ProblemData { u0: Field::zeros(*grid), v0: None, f: None, g: Vec::new(), h: h.to_vec() };
    let noise = Noise { wiener: None, jumps: paths.to_vec(), seed: None };
    solve_linear_as(&data, params, grid, time, &noise, SolveKind::JumpConvolution)
}

/// `sum_k int q_{alpha,beta1}(t - s) * g^k(s) dW^k_s` with zero initial data.
pub fn stochastic_convolution_wiener(
    g: &[SpaceTimeFn],
    params: &ProblemParams,
    grid: &TorusGrid,
    wiener: &WienerPath,
) -> Result<SolutionField> {
    let data = ProblemData { u0: Field::zeros(*grid), v0: None, f: None, g: g.to_vec(), h: Vec::new() };
    let noise = Noise { wiener: Some(wiener.clone()), jumps: Vec::new(), seed: None };
    solve_linear_as(&data, params, grid, wiener.grid(), &noise, SolveKind::WienerConvolution)
}

/// Picard iteration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 50 }
    }
}

/// Fixed point of `u -> R(u)`, `R` the linear solve with data `f(u)`, `g(u)`,
/// `h(u(s-))`. Iteration starts from the free evolution of the initial data
/// and stops when the discrete `L_p` norm of the increment is below `tol`.
pub fn solve_semilinear(
    data: &SemilinearData,
    params: &ProblemParams,
    grid: &TorusGrid,
    time: TimeGrid,
    noise: &Noise,
    opts: PicardOptions,
) -> Result<SolutionField> {
    let etas = vec![None; data.h.len()];
    picard(data, &etas, params, grid, time, noise, opts, SolveKind::Semilinear)
}

#[allow(clippy::too_many_arguments)]
fn picard(
    data: &SemilinearData,
    etas: &[Option<Field>],
    params: &ProblemParams,
    grid: &TorusGrid,
    time: TimeGrid,
    noise: &Noise,
    opts: PicardOptions,
    kind: SolveKind,
) -> Result<SolutionField> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::Parameter("Picard needs tol > 0 and max_iter >= 1".into()));
    }
    check_horizon(noise, time)?;
    let engine = Engine::new(params, grid, time)?;
    check_grid(&data.u0, grid, "u0")?;
    let wiener = check_wiener(noise, data.g.len(), time)?;
    let events = collect_events(noise, data.h.len())?;
    for (k, hk) in data.h.iter().enumerate() {
        if hk.len() != noise.jumps[k].d1() {
            return Err(Error::Shape(format!("h^k needs {} components for copy {k}", noise.jumps[k].d1())));
        }
    }
    let ev_times: Vec<f64> = {
        let mut t: Vec<f64> = events.iter().map(|e| e.0).collect();
        t.dedup();
        t
    };
    let times = engine.output_times(&ev_times);
    // events not on the output grid need separate left-limit queries
    let extra: Vec<f64> = if engine.jumps_in_grid() { Vec::new() } else { ev_times.clone() };

    let base = Sources {
        u0: Some(data.u0.spectrum()),
        v0: match &data.v0 {
            Some(v) => {
                check_grid(v, grid, "v0")?;
                Some(v.spectrum())
            }
            None => None,
        },
        ..Default::default()
    };
    let (mut values, mut left, mut extra_left) = engine.run(&base, &times, &extra);
    let p = params.p;
    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    let node_index: Vec<usize> =
        (0..time.steps()).map(|j| times.iter().position(|&s| s == time.node(j)).expect("node in grid")).collect();
    for iter in 1..=opts.max_iter {
        let u_left_at = |s: f64| -> &Field {
            if engine.jumps_in_grid() {
                &left[times.iter().position(|&x| x == s).expect("event in grid")]
            } else {
                &extra_left[ev_times.iter().position(|&x| x == s).expect("event listed")]
            }
        };
        let mut src = Sources { u0: base.u0.clone(), v0: base.v0.clone(), ..Default::default() };
        if let Some(f) = &data.f {
            src.forcing_times = times.clone();
            src.forcing = times.par_iter().zip(&values).map(|(&t, u)| f.apply(t, u).spectrum()).collect();
        }
        if let Some(w) = wiener {
            src.wiener = (0..time.steps())
                .into_par_iter()
                .map(|j| {
                    let tj = time.node(j);
                    let u = &values[node_index[j]];
                    let mut acc = Field::zeros(*grid);
                    for (k, g) in data.g.iter().enumerate() {
                        acc.axpy(w.increments(k)[j], &g.apply(tj, u)).expect("same grid");
                    }
                    acc.spectrum()
                })
                .collect();
        }
        src.events = events
            .par_iter()
            .map(|&(s, k, i)| {
                let u = u_left_at(s);
                let path = &noise.jumps[k];
                let mut acc = Field::zeros(*grid);
                for (hr, z) in data.h[k].iter().zip(path.jump(i)) {
                    let mut v = hr.apply(s, u);
                    if let Some(eta) = &etas[k] {
                        v = Field::new(*grid, v.values().iter().zip(eta.values()).map(|(a, b)| a * b).collect())
                            .expect("same grid");
                    }
                    acc.axpy(*z, &v).expect("same grid");
                }
                (s, acc.spectrum())
            })
            .collect();
        let (nv, nl, ne) = engine.run(&src, &times, &extra);
        let diff: Vec<Field> = nv
            .iter()
            .zip(&values)
            .map(|(a, b)| {
                let mut d = a.clone();
                d.axpy(-1.0, b).expect("same grid");
                d
            })
            .collect();
        let inc = time_lp(&times, &diff, p);
        if let Some(prev) = increments.last() {
            ratios.push(if *prev > 0.0 { inc / prev } else { 0.0 });
        }
        increments.push(inc);
        values = nv;
        left = nl;
        extra_left = ne;
        if values.iter().any(|v| v.values().iter().any(|x| !x.is_finite())) {
            return Err(Error::NonConvergence { iterations: iter, ratios });
        }
        if inc < opts.tol {
            return Ok(SolutionField {
                grid: *grid,
                params: engine.params,
                times,
                values,
                left,
                provenance: Provenance {
                    kind,
                    iterations: iter,
                    increments,
                    ratios,
                    seed: noise.seed,
                    gate: None,
                },
            });
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, ratios })
}

/// Semilinear problem driven by truncated space-time Levy white noise:
/// `h^k(u) = h(u) eta^k` with `K` independent jump copies, after the
/// dimension gate.
#[allow(clippy::too_many_arguments)]
pub fn solve_white_noise(
    u0: &Field,
    f: Option<Nonlinearity>,
    h: Nonlinearity,
    params: &ProblemParams,
    time: TimeGrid,
    levy: &LevySpec,
    k: usize,
    seed: u64,
    opts: PicardOptions,
) -> Result<SolutionField> {
    let grid = u0.grid();
    let audit = dimension_gate(params, grid.dim())?;
    let noise_field = white_noise_field(levy, k, &grid, time.tmax(), seed)?;
    let etas = noise_field.fields.iter().cloned().map(Some).collect::<Vec<_>>();
    let data = SemilinearData { u0: u0.clone(), v0: None, f, g: Vec::new(), h: vec![vec![h]; k] };
    let noise = Noise { wiener: None, jumps: noise_field.paths, seed: Some(seed) };
    let mut sol = picard(&data, &etas, params, &grid, time, &noise, opts, SolveKind::WhiteNoise)?;
    sol.provenance.gate = Some(audit);
    Ok(sol)
}

//! Subcommands. Every option can come from a JSON config file (same key
//! names, snake case); flags override the file. The merged document is the
//! effective configuration recorded in the manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use fspde_core::config::{from_value, parse_json, ExperimentConfig};
use fspde_core::fieldio::{csv_row, field_csv, fmt_f64, paths_csv, read_field, write_field};
use fspde_core::fraccalc::{caputo_derivative, frac_integral, rl_derivative, GridFunction, TimeGrid};
use fspde_core::kernels::{kernel_field, spectral_multiplier, KernelKind, KernelSymbol, Multiplier};
use fspde_core::lpnorms::{norm, DyadicPartition, NormSpec, Space};
use fspde_core::params::ProblemParams;
use fspde_core::solver::solve_linear;
use fspde_core::specfun::{ml_with, MLParams, MlMethod};
use fspde_core::torus::TorusGrid;
use fspde_core::verify::{run_claim, Claim};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::output::{manifest_path_for, write_atomic, Manifest};
use crate::{init_threads, read_text, CliError};

/// Reads the optional config file, removes its `threads` key and overlays
/// the flags that were given.
fn merged(config: Option<&PathBuf>, flags: &impl Serialize) -> Result<(Value, Option<usize>), CliError> {
    let mut doc = match config {
        Some(path) => parse_json(&read_text(path)?)?,
        None => Value::Object(Map::new()),
    };
    let Value::Object(map) = &mut doc else {
        return Err(CliError::config("/: config must be a JSON object"));
    };
    let threads = match map.remove("threads") {
        None => None,
        Some(v) => Some(
            v.as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| CliError::config(format!("/threads: expected a positive integer, got {v}")))?,
        ),
    };
    if let Value::Object(over) = serde_json::to_value(flags).expect("flags serialize") {
        for (k, v) in over {
            if !v.is_null() {
                map.insert(k, v);
            }
        }
    }
    Ok((doc, threads))
}

fn resolve<T: DeserializeOwned>(
    config: Option<&PathBuf>,
    flags: &impl Serialize,
    threads: Option<usize>,
) -> Result<(T, Value), CliError> {
    let (doc, cfg_threads) = merged(config, flags)?;
    init_threads(threads, cfg_threads)?;
    Ok((from_value(&doc)?, doc))
}

fn set_pointer(doc: &mut Value, pointer: &[&str], value: Value) -> Result<(), CliError> {
    let mut cur = doc;
    for (i, key) in pointer.iter().enumerate() {
        let Value::Object(map) = cur else {
            return Err(CliError::config(format!("/{}: expected an object", pointer[..i].join("/"))));
        };
        if i + 1 == pointer.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        cur = map.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    Ok(())
}

fn write_manifest(manifest: Manifest, path: Option<&Path>, started: Instant) -> Result<(), CliError> {
    match path {
        Some(p) => manifest.write(p, started),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Series,
    Integral,
    #[default]
    Auto,
}

#[derive(Debug, Args, Serialize)]
pub struct MlOpts {
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Decimal places printed.
    #[arg(long)]
    digits: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MlRun {
    a: f64,
    b: f64,
    z: f64,
    #[serde(default)]
    method: MethodArg,
    #[serde(default = "default_digits")]
    digits: usize,
}

fn default_digits() -> usize {
    10
}

pub fn ml(o: MlOpts, threads: Option<usize>) -> Result<u8, CliError> {
    let started = Instant::now();
    let (run, doc): (MlRun, _) = resolve(o.config.as_ref(), &o, threads)?;
    let method = match run.method {
        MethodArg::Series => MlMethod::Series,
        MethodArg::Integral => MlMethod::Integral,
        MethodArg::Auto => MlMethod::Auto,
    };
    let (value, used) = ml_with(MLParams::new(run.a, run.b)?, run.z, method)?;
    println!("{value:.prec$} {used}", prec = run.digits.min(40));
    write_manifest(Manifest::new("ml", &doc, Vec::new(), None), o.manifest.as_deref(), started)?;
    Ok(0)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FracOp {
    Integral,
    Rl,
    Caputo,
}

#[derive(Debug, Args, Serialize)]
pub struct FraccalcOpts {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    op: Option<FracOp>,
    /// CSV with columns t,value on a uniform grid starting at t = 0.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FraccalcRun {
    alpha: f64,
    op: FracOp,
    input: PathBuf,
    output: PathBuf,
}

fn parse_series_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (ln == 0 && line.starts_with(|c: char| c.is_ascii_alphabetic())) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |s: &str| {
            s.parse::<f64>().map_err(|_| CliError::config(format!("input line {}: bad number '{s}'", ln + 1)))
        };
        if cols.len() != 2 {
            return Err(CliError::config(format!("input line {}: expected columns t,value", ln + 1)));
        }
        ts.push(num(cols[0])?);
        vs.push(num(cols[1])?);
    }
    Ok((ts, vs))
}

fn uniform_grid(ts: &[f64]) -> Result<TimeGrid, CliError> {
    if ts.len() < 2 || ts[0] != 0.0 {
        return Err(CliError::config("input times must start at t = 0 and have at least two rows"));
    }
    let n = ts.len() - 1;
    let grid = TimeGrid::new(ts[n], n)?;
    let dt = grid.dt();
    if let Some(i) = ts.iter().enumerate().position(|(i, &t)| (t - grid.node(i)).abs() > 1e-9 * dt.max(t.abs())) {
        return Err(CliError::config(format!("input times are not uniform (row {})", i + 1)));
    }
    Ok(grid)
}

pub fn fraccalc(o: FraccalcOpts, threads: Option<usize>) -> Result<u8, CliError> {
    let started = Instant::now();
    let (run, doc): (FraccalcRun, _) = resolve(o.config.as_ref(), &o, threads)?;
    let (ts, vs) = parse_series_csv(&read_text(&run.input)?)?;
    let grid = uniform_grid(&ts)?;
    let phi = GridFunction::new(grid, vs)?;
    let out = match run.op {
        FracOp::Integral => frac_integral(&phi, run.alpha)?,
        FracOp::Rl => rl_derivative(&phi, run.alpha)?,
        FracOp::Caputo => caputo_derivative(&phi, run.alpha)?,
    };
    let mut text = String::from("t,value\n");
    for (t, v) in ts.iter().zip(out.values()) {
        text.push_str(&csv_row(&[*t, *v]));
        text.push('\n');
    }
    write_atomic(&run.output, text.as_bytes())?;
    let mut m = Manifest::new("fraccalc", &doc, Vec::new(), None);
    m.outputs.push(run.output.display().to_string());
    let mpath = o.manifest.clone().unwrap_or_else(|| manifest_path_for(&run.output));
    m.write(&mpath, started)?;
    Ok(0)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, ValueEnum)]
pub enum KindArg {
    #[value(name = "p")]
    #[serde(rename = "p")]
    P,
    #[value(name = "q")]
    #[serde(rename = "q")]
    Q,
    #[value(name = "P")]
    #[serde(rename = "P")]
    BigP,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelOpts {
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Required for the q kernel.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    period: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of time derivatives (0 or 1).
    #[arg(long)]
    sigma: Option<u8>,
    /// Largest admissible symbol magnitude at the Nyquist frequency.
    #[arg(long)]
    nyquist_tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelRun {
    kind: KindArg,
    alpha: f64,
    beta: Option<f64>,
    t: f64,
    #[serde(default = "one")]
    dim: usize,
    #[serde(default = "default_modes")]
    modes: usize,
    #[serde(default = "two_pi")]
    period: f64,
    #[serde(default)]
    gamma: f64,
    #[serde(default)]
    sigma: u8,
    #[serde(default = "default_nyquist_tol")]
    nyquist_tol: f64,
    out: PathBuf,
}

fn one() -> usize {
    1
}
fn default_modes() -> usize {
    128
}
fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}
fn default_nyquist_tol() -> f64 {
    1e-12
}

pub fn kernel(o: KernelOpts, threads: Option<usize>) -> Result<u8, CliError> {
    let started = Instant::now();
    let (run, doc): (KernelRun, _) = resolve(o.config.as_ref(), &o, threads)?;
    let kind = match (run.kind, run.beta) {
        (KindArg::P, _) => KernelKind::P,
        (KindArg::BigP, _) => KernelKind::BigP,
        (KindArg::Q, Some(beta)) => KernelKind::Q { beta },
        (KindArg::Q, None) => return Err(CliError::config("/beta: the q kernel needs --beta")),
    };
    let sym = KernelSymbol::new(kind, run.alpha, run.t)?.with_gamma(run.gamma)?.with_sigma(run.sigma)?;
    let grid = TorusGrid::new(run.dim, run.modes, run.period)?;
    let field = kernel_field(&sym, &grid, run.nyquist_tol)?;
    write_atomic(&run.out, field_csv(&field).as_bytes())?;
    let mut m = Manifest::new("kernel", &doc, Vec::new(), None);
    m.outputs.push(run.out.display().to_string());
    let mpath = o.manifest.clone().unwrap_or_else(|| manifest_path_for(&run.out));
    m.write(&mpath, started)?;
    Ok(0)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SpaceArg {
    Lp,
    Sobolev,
    Besov,
}

#[derive(Debug, Args, Serialize)]
pub struct LpNormOpts {
    #[arg(long, value_enum)]
    space: Option<SpaceArg>,
    /// Smoothness index for the Sobolev and Besov spaces.
    #[arg(long, allow_hyphen_values = true)]
    index: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Field file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LpNormRun {
    space: SpaceArg,
    index: Option<f64>,
    p: f64,
    input: PathBuf,
}

pub fn lp_norm(o: LpNormOpts, threads: Option<usize>) -> Result<u8, CliError> {
    let started = Instant::now();
    let (run, doc): (LpNormRun, _) = resolve(o.config.as_ref(), &o, threads)?;
    let index = || run.index.ok_or_else(|| CliError::config("/index: this space needs --index"));
    let space = match run.space {
        SpaceArg::Lp => Space::Lp,
        SpaceArg::Sobolev => Space::Sobolev(index()?),
        SpaceArg::Besov => Space::Besov(index()?),
    };
    let file = std::fs::File::open(&run.input).map_err(|e| CliError::io(&run.input, e))?;
    let field = read_field(std::io::BufReader::new(file))?;
    let spec = NormSpec::new(space, run.p)?;
    let value = match space {
        Space::Lp => field.lp_norm(spec.p),
        Space::Sobolev(g) => spectral_multiplier(&field, Multiplier::Bessel(g)).lp_norm(spec.p),
        Space::Besov(_) => norm(&field, &spec, &DyadicPartition::build(&field.grid())?)?,
    };
    println!("{}", fmt_f64(value));
    write_manifest(Manifest::new("lp-norm", &doc, Vec::new(), None), o.manifest.as_deref(), started)?;
    Ok(0)
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateOpts {
    /// Experiment configuration (JSON).
    #[arg(long)]
    #[serde(skip)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
    /// Comma-separated seeds (overrides `seeds`).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip)]
    seeds: Option<Vec<u64>>,
    /// Overrides `time.steps`.
    #[arg(long)]
    #[serde(skip)]
    steps: Option<usize>,
    /// Overrides `time.T`.
    #[arg(long)]
    #[serde(skip)]
    t_max: Option<f64>,
    /// Overrides `grid.N`.
    #[arg(long)]
    #[serde(skip)]
    modes: Option<usize>,
}

pub fn simulate(o: SimulateOpts, threads: Option<usize>) -> Result<u8, CliError> {
    let started = Instant::now();
    let (mut doc, cfg_threads) = merged(Some(&o.config), &())?;
    init_threads(threads, cfg_threads)?;
    if let Some(s) = &o.seeds {
        set_pointer(&mut doc, &["seeds"], serde_json::to_value(s).expect("seed list"))?;
    }
    if let Some(v) = o.steps {
        set_pointer(&mut doc, &["time", "steps"], v.into())?;
    }
    if let Some(v) = o.t_max {
        set_pointer(&mut doc, &["time", "T"], v.into())?;
    }
    if let Some(v) = o.modes {
        set_pointer(&mut doc, &["grid", "N"], v.into())?;
    }
    let cfg = ExperimentConfig::from_json_value(&doc)?;
    let grid = cfg.torus()?;
    let time = cfg.time_grid()?;
    let data = cfg.problem_data()?;
    let mut manifest = Manifest::new("simulate", &doc, cfg.seeds.clone(), Some(&cfg.params));
    let mut iterations = Vec::new();
    for &seed in &cfg.seeds {
        let noise = cfg.noise(seed)?;
        let sol = solve_linear(&data, &cfg.params, &grid, time, &noise)?;
        iterations.push(sol.provenance.iterations);
        let dir = o.out.join(format!("seed-{seed}"));
        let mut times = String::from("i,t\n");
        for (i, (t, u)) in sol.times.iter().zip(&sol.values).enumerate() {
            let path = dir.join(format!("u-{i:05}.fld"));
            let mut bytes = Vec::new();
            write_field(&mut bytes, u)?;
            write_atomic(&path, &bytes)?;
            manifest.outputs.push(path.display().to_string());
            times.push_str(&format!("{i},{}\n", fmt_f64(*t)));
        }
        let path = dir.join("times.csv");
        write_atomic(&path, times.as_bytes())?;
        manifest.outputs.push(path.display().to_string());
        if !noise.jumps.is_empty() {
            let path = dir.join("paths.csv");
            write_atomic(&path, paths_csv(&noise.jumps)?.as_bytes())?;
            manifest.outputs.push(path.display().to_string());
        }
    }
    manifest.iterations = Some(iterations);
    manifest.write(&o.out.join("manifest.json"), started)?;
    Ok(0)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ClaimArg {
    BandEnvelope,
    BesovConv,
    MaxReg,
    Scaling,
    Gronwall,
}

#[derive(Debug, Args)]
pub struct VerifyOpts {
    #[arg(long, value_enum)]
    claim: ClaimArg,
    /// Study configuration (JSON); the schema depends on the claim.
    #[arg(long)]
    config: PathBuf,
    /// Report file.
    #[arg(long)]
    out: PathBuf,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `samples`.
    #[arg(long)]
    samples: Option<usize>,
    /// Manifest file (default: next to the report).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

pub fn verify(o: VerifyOpts, threads: Option<usize>) -> Result<u8, CliError> {
    let started = Instant::now();
    let (mut doc, cfg_threads) = merged(Some(&o.config), &())?;
    init_threads(threads, cfg_threads)?;
    if let Some(v) = o.seed {
        set_pointer(&mut doc, &["seed"], v.into())?;
    }
    if let Some(v) = o.samples {
        set_pointer(&mut doc, &["samples"], v.into())?;
    }
    let claim = match o.claim {
        ClaimArg::BandEnvelope => Claim::BandEnvelope,
        ClaimArg::BesovConv => Claim::BesovConv,
        ClaimArg::MaxReg => Claim::MaxReg,
        ClaimArg::Scaling => Claim::Scaling,
        ClaimArg::Gronwall => Claim::Gronwall,
    };
    let report = run_claim(claim, &doc)?;
    write_atomic(&o.out, report.to_json()?.as_bytes())?;
    let params: Option<ProblemParams> = doc.get("params").and_then(|p| serde_json::from_value(p.clone()).ok());
    let seeds = doc.get("seed").and_then(Value::as_u64).into_iter().collect();
    let mut m = Manifest::new(&format!("verify {}", claim.name()), &doc, seeds, params.as_ref());
    m.verdict = Some(if report.verdict.passed() { "pass" } else { "fail" }.into());
    m.outputs.push(o.out.display().to_string());
    let mpath = o.manifest.clone().unwrap_or_else(|| manifest_path_for(&o.out));
    m.write(&mpath, started)?;
    if report.verdict.passed() {
        Ok(0)
    } else {
        eprintln!("verification failed: {}", claim.name());
        Ok(CliError::FAILED)
    }
}

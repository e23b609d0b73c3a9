//! JSON configuration: typed parsing with JSON-pointer error locations,
//! content digests and the experiment document used by `simulate`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fraccalc::TimeGrid;
use crate::levy::LevySpec;
use crate::params::ProblemParams;
use crate::solver::{Noise, ProblemData, SpaceTimeFn};
use crate::torus::{Field, TorusGrid};

/// Converts a serde path such as `params.beta2` or `levels[1].n` into a JSON
/// pointer (`/params/beta2`, `/levels/1/n`).
fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

/// Deserializes `value`, reporting the JSON pointer of the offending key on
/// failure.
pub fn from_value<T: DeserializeOwned>(value: &Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let ptr = pointer_of(e.path());
        Error::Format(format!("{ptr}: {}", e.into_inner()))
    })
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("invalid JSON: {e}")))
}

/// Compact JSON with object keys sorted at every level.
pub fn canonical_json(value: &Value) -> String {
    fn write(v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                out.push('{');
                for (i, k) in keys.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&Value::String((*k).clone()).to_string());
                    out.push(':');
                    write(&map[k.as_str()], out);
                }
                out.push('}');
            }
            Value::Array(items) => {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write(x, out);
                }
                out.push(']');
            }
            other => out.push_str(&other.to_string()),
        }
    }
    let mut out = String::new();
    write(value, &mut out);
    out
}

/// SHA-256 of the canonical form, as lowercase hex.
pub fn config_digest(value: &Value) -> String {
    hex::encode(Sha256::digest(canonical_json(value).as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(rename = "T")]
    pub t: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WienerSpec {
    #[serde(rename = "K")]
    pub k: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub levy: Option<LevySpec>,
    #[serde(default)]
    pub wiener: Option<WienerSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Zero,
    One,
    /// `cos(2 pi x_1 / L)`
    Cos1,
    /// `sin(2 pi x_1 / L)`
    Sin1,
    /// A few low modes with decaying amplitudes.
    Smooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeTerm {
    /// Integer wave vector, one entry per dimension.
    pub wave: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Time-independent field given by name or as a list of Fourier modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Preset(Preset),
    Modes(Vec<ModeTerm>),
}

impl FieldSpec {
    pub fn field(&self, grid: TorusGrid) -> Result<Field> {
        let w = 2.0 * PI / grid.period();
        let d = grid.dim();
        Ok(match self {
            FieldSpec::Preset(Preset::Zero) => Field::zeros(grid),
            FieldSpec::Preset(Preset::One) => Field::from_fn(grid, |_| 1.0),
            FieldSpec::Preset(Preset::Cos1) => Field::from_fn(grid, |x| (w * x[0]).cos()),
            FieldSpec::Preset(Preset::Sin1) => Field::from_fn(grid, |x| (w * x[0]).sin()),
            FieldSpec::Preset(Preset::Smooth) => Field::from_fn(grid, |x| {
                (1..=3)
                    .map(|m| {
                        let phase: f64 = x[..d].iter().map(|xi| w * m as f64 * xi).sum();
                        (phase.cos() + 0.5 * phase.sin()) / (m * m) as f64
                    })
                    .sum()
            }),
            FieldSpec::Modes(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    if t.wave.len() != d {
                        return Err(Error::Format(format!(
                            "/{i}/wave: has {} entries, grid dimension is {d}",
                            t.wave.len()
                        )));
                    }
                    if t.wave.iter().any(|m| 2 * m.unsigned_abs() as usize >= grid.modes()) {
                        return Err(Error::Resolution(format!("/{i}/wave: mode {:?} is not resolved by N = {}", t.wave, grid.modes())));
                    }
                }
                Field::from_fn(grid, |x| {
                    terms
                        .iter()
                        .map(|t| {
                            let phase: f64 = t.wave.iter().zip(x).map(|(m, xi)| w * *m as f64 * xi).sum();
                            t.cos * phase.cos() + t.sin * phase.sin()
                        })
                        .sum()
                })
            }
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default)]
    pub u0: Option<FieldSpec>,
    #[serde(default)]
    pub v0: Option<FieldSpec>,
    #[serde(default)]
    pub f: Option<FieldSpec>,
    /// Same coefficient for every Wiener copy.
    #[serde(default)]
    pub g: Option<FieldSpec>,
    /// Same coefficient for every jump copy and component.
    #[serde(default)]
    pub h: Option<FieldSpec>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ProblemParams,
    pub grid: GridSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn at(ptr: &str, e: Error) -> Error {
    let msg = match e {
        Error::Parameter(m) | Error::Domain(m) | Error::Resolution(m) | Error::Shape(m) | Error::Format(m) => m,
        other => other.to_string(),
    };
    // mode-list errors already carry a relative pointer
    if msg.starts_with('/') {
        Error::Format(format!("{ptr}{msg}"))
    } else {
        Error::Format(format!("{ptr}: {msg}"))
    }
}

impl ExperimentConfig {
    /// Parses and validates a configuration document.
    pub fn from_json_value(value: &Value) -> Result<Self> {
        let cfg: Self = from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validated().map_err(|e| at("/params", e))?;
        let grid = self.torus().map_err(|e| at("/grid", e))?;
        self.time_grid().map_err(|e| at("/time", e))?;
        if let Some(l) = &self.noise.levy {
            LevySpec::new(l.lambda, l.law, l.sigma, l.d1, l.copies).map_err(|e| at("/noise/levy", e))?;
        }
        if self.seeds.is_empty() {
            return Err(Error::Format("/seeds: at least one seed is required".into()));
        }
        let d = &self.data;
        for (name, spec) in [("u0", &d.u0), ("v0", &d.v0), ("f", &d.f), ("g", &d.g), ("h", &d.h)] {
            if let Some(s) = spec {
                s.field(grid).map_err(|e| at(&format!("/data/{name}"), e))?;
            }
        }
        if d.g.is_some() && self.noise.wiener.is_none() {
            return Err(Error::Format("/data/g: needs noise.wiener".into()));
        }
        if d.h.is_some() && self.noise.levy.is_none() {
            return Err(Error::Format("/data/h: needs noise.levy".into()));
        }
        Ok(())
    }

    pub fn torus(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.grid.d, self.grid.n, self.grid.l)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.time.t, self.time.steps)
    }

    pub fn problem_data(&self) -> Result<ProblemData> {
        let grid = self.torus()?;
        let field = |s: &Option<FieldSpec>| s.as_ref().map(|s| s.field(grid)).transpose();
        let constant = |f: Field| -> SpaceTimeFn { Arc::new(move |_| f.clone()) };
        let wiener_k = self.noise.wiener.map_or(0, |w| w.k);
        let (levy_k, d1) = self.noise.levy.map_or((0, 0), |l| (l.copies, l.d1));
        Ok(ProblemData {
            u0: field(&self.data.u0)?.unwrap_or_else(|| Field::zeros(grid)),
            v0: field(&self.data.v0)?,
            f: field(&self.data.f)?.map(constant),
            g: match field(&self.data.g)? {
                Some(g) => vec![constant(g); wiener_k],
                None => Vec::new(),
            },
            h: match field(&self.data.h)? {
                Some(h) => vec![vec![constant(h); d1]; levy_k],
                None => Vec::new(),
            },
        })
    }

    /// Noise realisation for one seed; only the sources with data are sampled.
    pub fn noise(&self, seed: u64) -> Result<Noise> {
        let wiener_k = if self.data.g.is_some() { self.noise.wiener.map_or(0, |w| w.k) } else { 0 };
        let levy = if self.data.h.is_some() { self.noise.levy.as_ref() } else { None };
        Noise::sample(self.time_grid()?, wiener_k, levy, seed)
    }
}

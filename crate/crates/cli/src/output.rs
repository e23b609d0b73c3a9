//! Atomic file emission and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fspde_core::config::{canonical_json, config_digest};
use fspde_core::params::{derived_exponents, ProblemParams};
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Writes `bytes` to a temporary file in the target directory, then renames
/// it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_digest: String,
    pub config: Value,
    pub seeds: Vec<u64>,
    pub derived_exponents: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

impl Manifest {
    /// `config` is the effective configuration after flag overrides.
    pub fn new(command: &str, config: &Value, seeds: Vec<u64>, params: Option<&ProblemParams>) -> Self {
        let derived = params
            .and_then(|p| derived_exponents(p).ok())
            .map(|d| serde_json::to_value(d).expect("plain struct"));
        Self {
            tool: "fspde",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_digest: config_digest(config),
            config: serde_json::from_str(&canonical_json(config)).expect("canonical JSON parses"),
            seeds,
            derived_exponents: derived,
            iterations: None,
            verdict: None,
            outputs: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn write(mut self, path: &Path, started: Instant) -> Result<(), CliError> {
        self.wall_time_s = started.elapsed().as_secs_f64();
        let mut text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }
}

/// `report.json` -> `report.manifest.json`.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    out.with_file_name(format!("{stem}.manifest.json"))
}

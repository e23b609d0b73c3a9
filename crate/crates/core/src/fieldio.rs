//! Binary field files and fixed-format CSV.
//!
//! A field file is a 32-byte header (`b"FSPDEF1\0"`, `d` and `N` as
//! little-endian `u64`, `L` as little-endian `f64`) followed by `N^d`
//! little-endian `f64` values in row-major order.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::levy::JumpPath;
use crate::torus::{Field, TorusGrid};

pub const FIELD_MAGIC: [u8; 8] = *b"FSPDEF1\0";
pub const HEADER_LEN: usize = 32;

pub fn encode_field(field: &Field) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(&FIELD_MAGIC);
    out.extend_from_slice(&(g.dim() as u64).to_le_bytes());
    out.extend_from_slice(&(g.modes() as u64).to_le_bytes());
    out.extend_from_slice(&g.period().to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<Field> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("field file too short: {} bytes", bytes.len())));
    }
    if bytes[..8] != FIELD_MAGIC {
        return Err(Error::Format("bad field file magic".into()));
    }
    let word = |i: usize| -> [u8; 8] { bytes[i..i + 8].try_into().expect("8 bytes") };
    let d = u64::from_le_bytes(word(8)) as usize;
    let n = u64::from_le_bytes(word(16)) as usize;
    let l = f64::from_le_bytes(word(24));
    let grid = TorusGrid::new(d, n, l)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * grid.len() {
        return Err(Error::Format(format!("field file holds {} bytes of data, expected {}", body.len(), 8 * grid.len())));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Field::new(grid, values)
}

pub fn write_field(mut w: impl Write, field: &Field) -> Result<()> {
    w.write_all(&encode_field(field))?;
    Ok(())
}

pub fn read_field(mut r: impl Read) -> Result<Field> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_field(&bytes)
}

/// 17 significant digits, '.' decimal point, independent of locale.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(",")
}

/// `x,value` rows for a 1-D field, or `x_1,..,x_d,value` in general.
pub fn field_csv(field: &Field) -> String {
    let g = field.grid();
    let d = g.dim();
    let mut out: String = (1..=d).map(|i| if d == 1 { "x,".to_string() } else { format!("x_{i},") }).collect();
    out.push_str("value\n");
    for (i, v) in field.values().iter().enumerate() {
        let x = g.coords(i);
        let mut row: Vec<f64> = x[..d].to_vec();
        row.push(*v);
        out.push_str(&csv_row(&row));
        out.push('\n');
    }
    out
}

/// Jump paths as CSV with columns `k,time,z_1..z_d1`, one row per jump.
pub fn paths_csv(paths: &[JumpPath]) -> Result<String> {
    let d1 = paths.first().map_or(1, JumpPath::d1);
    if paths.iter().any(|p| p.d1() != d1) {
        return Err(Error::Shape("jump paths of different dimension".into()));
    }
    let mut out = String::from("k,time");
    for r in 1..=d1 {
        out.push_str(&format!(",z_{r}"));
    }
    out.push('\n');
    for (k, path) in paths.iter().enumerate() {
        for (i, t) in path.times().iter().enumerate() {
            let mut row = vec![*t];
            row.extend_from_slice(path.jump(i));
            out.push_str(&format!("{k},{}\n", csv_row(&row)));
        }
    }
    Ok(out)
}

/// Inverse of [`paths_csv`]; `horizon` is not stored in the file.
pub fn parse_paths_csv(text: &str, horizon: f64) -> Result<Vec<JumpPath>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty path file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 3 || cols[0] != "k" || cols[1] != "time" {
        return Err(Error::Format(format!("bad path header '{header}'")));
    }
    let d1 = cols.len() - 2;
    let mut per: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (ln, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != cols.len() {
            return Err(Error::Format(format!("line {}: expected {} columns", ln + 2, cols.len())));
        }
        let k: usize = f[0].parse().map_err(|_| Error::Format(format!("line {}: bad copy index", ln + 2)))?;
        let nums: Vec<f64> = f[1..]
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::Format(format!("line {}: bad number '{s}'", ln + 2))))
            .collect::<Result<_>>()?;
        if per.len() <= k {
            per.resize(k + 1, (Vec::new(), Vec::new()));
        }
        per[k].0.push(nums[0]);
        per[k].1.extend_from_slice(&nums[1..]);
    }
    per.into_iter().map(|(t, z)| JumpPath::from_jumps(t, z, d1, horizon)).collect()
}

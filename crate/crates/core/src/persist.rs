//! Run-directory storage: dense matrices in a small binary container, metadata as JSON.
//!
//! Container layout: the 8-byte magic `HRTHMAT1`, rows and columns as `u64`
//! little-endian, then `rows * cols` little-endian `f64` in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"HRTHMAT1";

/// Writes through a temporary sibling and renames, so readers never see partial files.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    let mut f = fs::File::create(tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(tmp, path)?;
    Ok(())
}

pub fn encode_matrix(rows: usize, cols: usize, data: &[f64]) -> Result<Vec<u8>> {
    if data.len() != rows * cols {
        return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
    }
    let mut out = Vec::with_capacity(24 + 8 * data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// `(rows, cols, row-major data)`.
pub fn decode_matrix(bytes: &[u8], origin: &str) -> Result<(usize, usize, Vec<f64>)> {
    let bad = |reason: &str| Error::Format { path: origin.to_string(), reason: reason.to_string() };
    if bytes.len() < 24 || &bytes[..8] != MAGIC {
        return Err(bad("missing matrix header"));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    let (rows, cols) = (word(1) as usize, word(2) as usize);
    let n = rows.checked_mul(cols).ok_or_else(|| bad("dimensions overflow"))?;
    if bytes.len() != 24 + 8 * n {
        return Err(bad("payload length does not match the dimensions"));
    }
    let data = bytes[24..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok((rows, cols, data))
}

pub fn write_matrix(path: &Path, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    write_atomic(path, &encode_matrix(rows, cols, data)?)
}

pub fn read_matrix(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    decode_matrix(&fs::read(path)?, &path.display().to_string())
}

/// Equal-length vectors stored one per row.
pub fn write_rows(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(r) = rows.iter().find(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
    }
    write_matrix(path, rows.len(), cols, &rows.concat())
}

pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let (rows, cols, data) = read_matrix(path)?;
    if cols == 0 {
        return Ok(vec![Vec::new(); rows]);
    }
    Ok(data.chunks_exact(cols).map(<[f64]>::to_vec).collect())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

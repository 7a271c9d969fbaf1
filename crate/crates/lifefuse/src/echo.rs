//! Echo-matrix binary files.
//!
//! Layout: three little-endian `u64` (rows M, columns N, reserved 0)
//! followed by M·N little-endian `f64` in row-major order. The slow- and
//! fast-time intervals live in a JSON sidecar next to the binary.

use std::path::{Path, PathBuf};

use lifefuse_core::sim::EchoMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil::{read_file, write_file};

pub const HEADER_BYTES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EchoSidecar {
    pub rows: u64,
    pub cols: u64,
    /// Slow-time interval T_s in seconds.
    pub slow_interval: f64,
    /// Fast-time interval T_f in seconds.
    pub fast_interval: f64,
}

/// `echo.bin` → `echo.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn encode_echo(echo: &EchoMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_BYTES + 8 * echo.data().len());
    out.extend_from_slice(&(echo.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(echo.cols() as u64).to_le_bytes());
    out.extend_from_slice(&0u64.to_le_bytes());
    for v in echo.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn word(bytes: &[u8], i: usize) -> [u8; 8] {
    bytes[i * 8..(i + 1) * 8].try_into().expect("8-byte slice")
}

pub fn decode_echo(path: &Path, bytes: &[u8], sidecar: &EchoSidecar) -> Result<EchoMatrix> {
    let bad = |msg: String| Error::Config(format!("{}: {msg}", path.display()));
    if bytes.len() < HEADER_BYTES {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let rows = u64::from_le_bytes(word(bytes, 0));
    let cols = u64::from_le_bytes(word(bytes, 1));
    let reserved = u64::from_le_bytes(word(bytes, 2));
    if reserved != 0 {
        return Err(bad(format!("reserved header word is {reserved}, expected 0")));
    }
    if (rows, cols) != (sidecar.rows, sidecar.cols) {
        return Err(bad(format!(
            "header says {rows}x{cols} but the sidecar says {}x{}",
            sidecar.rows, sidecar.cols
        )));
    }
    let count = rows
        .checked_mul(cols)
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| bad("matrix size overflows".into()))?;
    let body = &bytes[HEADER_BYTES..];
    if body.len() != count * 8 {
        return Err(bad(format!("expected {} data bytes, found {}", count * 8, body.len())));
    }
    let data = (0..count).map(|i| f64::from_le_bytes(word(body, i))).collect();
    Ok(EchoMatrix::new(
        rows as usize,
        cols as usize,
        data,
        sidecar.slow_interval,
        sidecar.fast_interval,
    )?)
}

/// Writes the binary and its sidecar.
pub fn write_echo(path: &Path, echo: &EchoMatrix) -> Result<()> {
    write_file(path, &encode_echo(echo))?;
    let sidecar = EchoSidecar {
        rows: echo.rows() as u64,
        cols: echo.cols() as u64,
        slow_interval: echo.slow_interval,
        fast_interval: echo.fast_interval,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("plain struct serializes");
    write_file(&sidecar_path(path), format!("{json}\n").as_bytes())
}

pub fn read_echo(path: &Path) -> Result<EchoMatrix> {
    let side_path = sidecar_path(path);
    let side_bytes = read_file(&side_path)?;
    let sidecar: EchoSidecar =
        serde_json::from_slice(&side_bytes).map_err(|e| Error::parse(&side_path, e.line() as u64, e.to_string()))?;
    decode_echo(path, &read_file(path)?, &sidecar)
}

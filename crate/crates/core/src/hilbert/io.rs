//! StateVector import/export.
//!
//! Binary layout, all little-endian:
//!
//! | bytes | field                                  |
//! |-------|----------------------------------------|
//! | 4     | magic `LSTV`                           |
//! | 4     | format version (`1`)                   |
//! | 4     | n (sites)                              |
//! | 4     | sector flag: `0` full, `1` fixed-down  |
//! | 4     | number of down spins (0 when full)     |
//! | 8     | amplitude count                        |
//! | 16·k  | amplitudes as (re: f64, im: f64) pairs |
//!
//! JSON (n ≤ 12 only): `{"n": .., "sector": "full" | {"fixed_down": k},
//! "amplitudes": [[re, im], ..]}`.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::SectorBasis;
use super::state::{Sector, StateVector};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LSTV";
const VERSION: u32 = 1;

/// JSON export is limited to this many sites.
pub const MAX_JSON_SITES: usize = 12;

pub fn write_binary<W: Write>(state: &StateVector, mut w: W) -> Result<()> {
    let (flag, n_down) = match state.sector() {
        Sector::Full => (0u32, 0u32),
        Sector::FixedDown(k) => (1u32, k as u32),
    };
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(state.n() as u32).to_le_bytes())?;
    w.write_all(&flag.to_le_bytes())?;
    w.write_all(&n_down.to_le_bytes())?;
    w.write_all(&(state.len() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * state.len());
    for a in state.amplitudes() {
        buf.extend_from_slice(&a.re.to_le_bytes());
        buf.extend_from_slice(&a.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<StateVector> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a state-vector file (bad magic)".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported state-vector version {version}")));
    }
    let n = read_u32(&mut r)? as usize;
    let flag = read_u32(&mut r)?;
    let n_down = read_u32(&mut r)? as usize;
    let mut count = [0u8; 8];
    r.read_exact(&mut count)?;
    let count = u64::from_le_bytes(count) as usize;
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)?;
    if raw.len() != 16 * count {
        return Err(Error::Format(format!(
            "expected {} amplitude bytes, found {}",
            16 * count,
            raw.len()
        )));
    }
    let amps = raw
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    match flag {
        0 => StateVector::full(n, amps),
        1 => StateVector::in_sector(Arc::new(SectorBasis::new(n, n_down)?), amps),
        other => Err(Error::Format(format!("unknown sector flag {other}"))),
    }
}

#[derive(Serialize, Deserialize)]
struct StateRecord {
    n: usize,
    sector: Sector,
    amplitudes: Vec<[f64; 2]>,
}

pub fn to_json(state: &StateVector) -> Result<String> {
    if state.n() > MAX_JSON_SITES {
        return Err(Error::resource(format!(
            "JSON export is limited to {MAX_JSON_SITES} sites; use the binary format"
        )));
    }
    let rec = StateRecord {
        n: state.n(),
        sector: state.sector(),
        amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
    };
    Ok(serde_json::to_string(&rec)?)
}

pub fn from_json(text: &str) -> Result<StateVector> {
    let rec: StateRecord = serde_json::from_str(text)?;
    if rec.n > MAX_JSON_SITES {
        return Err(Error::resource(format!("JSON states are limited to {MAX_JSON_SITES} sites")));
    }
    let amps = rec.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    match rec.sector {
        Sector::Full => StateVector::full(rec.n, amps),
        Sector::FixedDown(k) => StateVector::in_sector(Arc::new(SectorBasis::new(rec.n, k)?), amps),
    }
}

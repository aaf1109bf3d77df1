//! On-disk cache of a_p tables.
//!
//! Little-endian layout: a header of four u64 words
//! `{magic, version, conductor, p_max}` followed by one `(p: u32, a_p: i32)`
//! record per prime up to `p_max`. Files are named after the curve's
//! conductor and coefficients so different curves never collide.

use crate::curve::{ApTable, CurveSpec};
use crate::error::{Error, Result};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "TWISTDENSITY_CACHE";
pub const MAGIC: u64 = u64::from_le_bytes(*b"TWDAPTBL");
pub const VERSION: u64 = 1;
const HEADER_BYTES: usize = 32;

pub fn cache_file(dir: &Path, spec: &CurveSpec) -> PathBuf {
    dir.join(format!("ap_N{}_a{}_b{}.bin", spec.conductor(), spec.a(), spec.b()))
}

pub fn write_table(path: &Path, spec: &CurveSpec, table: &ApTable) -> Result<()> {
    let io = |e: std::io::Error| Error::Cache(format!("{}: {e}", path.display()));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut out = BufWriter::new(fs::File::create(&tmp).map_err(io)?);
        for word in [MAGIC, VERSION, spec.conductor(), table.p_max()] {
            out.write_all(&word.to_le_bytes()).map_err(io)?;
        }
        for (p, ap) in table.iter() {
            out.write_all(&(p as u32).to_le_bytes()).map_err(io)?;
            out.write_all(&(ap as i32).to_le_bytes()).map_err(io)?;
        }
        out.flush().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

pub fn read_table(path: &Path, spec: &CurveSpec) -> Result<ApTable> {
    let bytes = fs::read(path).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
    if bytes.len() < HEADER_BYTES || (bytes.len() - HEADER_BYTES) % 8 != 0 {
        return Err(Error::Cache(format!("{}: truncated file", path.display())));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    if word(0) != MAGIC || word(1) != VERSION {
        return Err(Error::Cache(format!("{}: bad magic or version", path.display())));
    }
    if word(2) != spec.conductor() {
        return Err(Error::Cache(format!("{}: conductor {} does not match {}", path.display(), word(2), spec.conductor())));
    }
    let (primes, a_p): (Vec<u64>, Vec<i64>) = bytes[HEADER_BYTES..]
        .chunks_exact(8)
        .map(|r| {
            let p = u32::from_le_bytes(r[..4].try_into().expect("4 bytes")) as u64;
            let ap = i32::from_le_bytes(r[4..].try_into().expect("4 bytes")) as i64;
            (p, ap)
        })
        .unzip();
    let table = ApTable::from_parts(primes, a_p);
    if table.p_max() != word(3) && !table.primes().is_empty() {
        return Err(Error::Cache(format!("{}: header p_max disagrees with records", path.display())));
    }
    Ok(table)
}

/// a_p table up to `p_max`, read from or written to the directory named by
/// `TWISTDENSITY_CACHE` when that variable is set.
pub fn load_or_compute(spec: &CurveSpec, p_max: u64) -> Result<ApTable> {
    match std::env::var_os(CACHE_ENV) {
        Some(dir) => load_or_compute_in(Path::new(&dir), spec, p_max),
        None => ApTable::compute(spec, p_max),
    }
}

pub fn load_or_compute_in(dir: &Path, spec: &CurveSpec, p_max: u64) -> Result<ApTable> {
    let path = cache_file(dir, spec);
    if let Ok(table) = read_table(&path, spec) {
        if table.p_max() >= p_max || covers(&table, p_max) {
            let (primes, a_p) = table.truncated(p_max).unzip();
            return Ok(ApTable::from_parts(primes, a_p));
        }
    }
    let table = ApTable::compute(spec, p_max)?;
    write_table(&path, spec, &table)?;
    Ok(table)
}

fn covers(table: &ApTable, p_max: u64) -> bool {
    crate::ntkit::build_sieve(p_max.max(2))
        .map(|s| s.primes().last().map(|&p| p as u64) == Some(table.p_max()))
        .unwrap_or(false)
}

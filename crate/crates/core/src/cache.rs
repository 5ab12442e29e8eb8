//! On-disk memo cache: a header line followed by one
//! `key<TAB>value<TAB>proven` line per query, written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::recursion::{Count, Query};

pub const CACHE_ENV: &str = "PLANAR_ENUM_CACHE";
pub const HEADER: &str = "planar-enum memo cache v1";

pub fn default_cache_path() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

fn cache_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Cache {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Reads a cache file; a missing file is an empty cache.
pub fn load(path: &Path) -> Result<Vec<(Query, Count)>> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(cache_error(path, e.to_string())),
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(HEADER) => {}
        Some(other) => return Err(cache_error(path, format!("unknown header `{other}`"))),
        None => return Ok(Vec::new()),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = || cache_error(path, format!("line {}: malformed entry", i + 2));
        let mut fields = line.split('\t');
        let (Some(key), Some(value), Some(proven), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad());
        };
        let query: Query = key.parse().map_err(|_| bad())?;
        let value: BigInt = value.parse().map_err(|_| bad())?;
        let proven = match proven {
            "1" => true,
            "0" => false,
            _ => return Err(bad()),
        };
        out.push((query, Count { value, proven }));
    }
    Ok(out)
}

/// Replaces the file with `entries`, via a temporary file in the same
/// directory.
pub fn save(path: &Path, entries: &[(Query, Count)]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).map_err(|e| cache_error(path, e.to_string()))?;
    let mut body = String::with_capacity(64 * entries.len() + HEADER.len() + 1);
    body.push_str(HEADER);
    body.push('\n');
    for (q, c) in entries {
        body.push_str(&format!("{q}\t{}\t{}\n", c.value, u8::from(c.proven)));
    }
    tmp.write_all(body.as_bytes())
        .map_err(|e| cache_error(path, e.to_string()))?;
    tmp.persist(path)
        .map_err(|e| cache_error(path, e.error.to_string()))?;
    Ok(())
}

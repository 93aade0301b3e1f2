use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(CliError::io(dir)),
        _ => Ok(()),
    }
}

/// Writes `bytes` and returns their SHA-256.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<String> {
    ensure_parent(path)?;
    fs::write(path, bytes).map_err(CliError::io(path))?;
    Ok(sha256_hex(bytes))
}

pub fn to_jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, &item).map_err(|e| CliError::Data(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Parses one JSON value per non-empty line; errors carry the 1-based line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(Vec<T>, String)> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(line).map_err(|e| CliError::Parse {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    Ok((items, sha256_hex(&bytes)))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        line: e.line(),
        message: e.to_string(),
    })
}

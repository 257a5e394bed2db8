//! Shared I/O helpers: strict config loading, number formatting and run
//! manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::BadInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))
}

pub fn check_schema(schema: u32) -> CliResult<()> {
    if schema == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(CliError::BadInput(format!(
            "unsupported schema {schema}, expected {SCHEMA_VERSION}"
        )))
    }
}

/// SHA-256 of the config serialized with sorted keys.
pub fn config_hash<T: Serialize>(config: &T) -> CliResult<String> {
    let value = serde_json::to_value(config).map_err(|e| CliError::Internal(e.to_string()))?;
    let canonical = serde_json::to_string(&value).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

pub fn unix_time() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
}

/// `<out>.manifest.json` next to the CSV.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_manifest(out: &Path, manifest: &RunManifest) -> CliResult<()> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    fs::write(manifest_path(out), text + "\n")?;
    Ok(())
}

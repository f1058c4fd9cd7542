//! Run manifest written beside every command's outputs: the command, a
//! hash of the fully resolved configuration, the seed in play and the
//! package versions. No timestamps, so reruns stay byte-identical.

use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    /// SHA-256 of the canonical JSON of the resolved configuration.
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub package: String,
    pub version: String,
}

/// Hashes a serializable configuration the same way every time: field
/// order comes from the struct definition, maps must be sorted.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let canonical = serde_json::to_vec(config).context("serialize config for hashing")?;
    let mut hasher = Sha256::new();
    hasher.update(&canonical);
    Ok(format!("{:x}", hasher.finalize()))
}

pub fn write_manifest<T: Serialize>(
    dir: &Path,
    command: &str,
    config: &T,
    seed: Option<u64>,
) -> Result<()> {
    let manifest = RunManifest {
        schema: 1,
        command: command.to_string(),
        config_hash: config_hash(config)?,
        seed,
        package: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    serde_json::to_writer_pretty(
        File::create(dir.join(MANIFEST_FILE)).context("create manifest.json")?,
        &manifest,
    )
    .context("write manifest.json")
}

//! Run manifests: enough provenance to reproduce any output bit-for-bit.

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    /// SHA-256 of the effective configuration JSON.
    pub config_digest: String,
    /// SHA-256 per input file.
    pub input_digests: BTreeMap<String, String>,
    pub elapsed_secs: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config_json: &str) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_digest: sha256_hex(config_json.as_bytes()),
            input_digests: BTreeMap::new(),
            elapsed_secs: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("reading input {}", path.display()))?;
        self.input_digests
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes `<stem>.manifest.json` next to the primary output.
    pub fn write_next_to(&self, primary_output: &Path, elapsed_secs: f64) -> Result<PathBuf> {
        let mut manifest = serde_json::to_value(self)?;
        manifest["elapsed_secs"] = serde_json::json!(elapsed_secs);
        let path = manifest_path(primary_output);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(path)
    }
}

pub fn manifest_path(primary_output: &Path) -> PathBuf {
    let stem = primary_output
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "run".to_string());
    primary_output.with_file_name(format!("{stem}.manifest.json"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Serializes a value as pretty JSON with a trailing newline.
pub fn to_json_file<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

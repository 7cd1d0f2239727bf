//! Run manifests: every subcommand records what it read, what it wrote,
//! and under which configuration, as `manifests/<command>.json` in the
//! output directory. Fingerprints are SHA-256 over file bytes, so two runs
//! with identical config and inputs can be compared artifact by artifact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use archminer_core::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::artifacts::atomic_write;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub config_hash: String,
    /// Input artifact name -> SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    /// Output artifact name -> SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

/// Collects fingerprints during a run and writes the manifest at the end.
pub struct ManifestBuilder {
    manifest: RunManifest,
    /// When set, both timestamps are pinned to this epoch second, making
    /// manifests byte-reproducible.
    epoch: Option<u64>,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl ManifestBuilder {
    pub fn new(command: &str, seed: u64, config_hash: String, epoch: Option<u64>) -> Self {
        ManifestBuilder {
            manifest: RunManifest {
                command: command.to_string(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                config_hash,
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                started_unix: epoch.unwrap_or_else(now_unix),
                finished_unix: 0,
            },
            epoch,
        }
    }

    pub fn record_input(&mut self, name: &str, bytes: &[u8]) {
        self.manifest.inputs.insert(name.to_string(), sha256_hex(bytes));
    }

    pub fn record_output(&mut self, name: &str, bytes: &[u8]) {
        self.manifest
            .outputs
            .insert(name.to_string(), sha256_hex(bytes));
    }

    /// Reads a required artifact from `dir` and records its fingerprint as
    /// an input, pointing at `producer` if it is missing.
    pub fn require_input(
        &mut self,
        dir: &Path,
        name: &str,
        producer: &'static str,
    ) -> Result<Vec<u8>> {
        let bytes = crate::artifacts::read_required(&dir.join(name), producer)?;
        self.record_input(name, &bytes);
        Ok(bytes)
    }

    /// Reads an optional artifact, recording it when present.
    pub fn optional_input(&mut self, dir: &Path, name: &str) -> Result<Option<Vec<u8>>> {
        let path = dir.join(name);
        match std::fs::read(&path) {
            Ok(bytes) => {
                self.record_input(name, &bytes);
                Ok(Some(bytes))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(CliError::Io { path, source: e }),
        }
    }

    /// Writes an output artifact atomically and records its fingerprint in
    /// one step.
    pub fn write_output(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
        atomic_write(&dir.join(name), bytes)?;
        self.record_output(name, bytes);
        Ok(())
    }

    /// Stamps the finish time and writes `manifests/<command>.json`.
    pub fn finish(mut self, out_dir: &Path) -> Result<RunManifest> {
        self.manifest.finished_unix = self.epoch.unwrap_or_else(now_unix);
        let path = manifest_path(out_dir, &self.manifest.command);
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        atomic_write(&path, text.as_bytes())?;
        Ok(self.manifest)
    }
}

pub fn manifest_path(out_dir: &Path, command: &str) -> PathBuf {
    out_dir.join("manifests").join(format!("{command}.json"))
}

/// Loads a prior run's manifest; used for cross-command fingerprint checks.
pub fn load_manifest(out_dir: &Path, command: &str, producer: &'static str) -> Result<RunManifest> {
    let path = manifest_path(out_dir, command);
    let bytes = match std::fs::read(&path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CliError::MissingArtifact { path, producer });
        }
        Err(e) => return Err(CliError::Io { path, source: e }),
    };
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

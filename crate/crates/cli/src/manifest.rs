use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use sumset_core::perturbation::StageTiming;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

/// Provenance of one run. Timestamps and timings live here so the other
/// outputs stay byte-identical across reruns.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_path: PathBuf,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    /// Effective configuration after command-line overrides.
    pub parameters: serde_json::Value,
    pub started_unix_ms: u128,
    pub stage_timings: Vec<StageTiming>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(command: &'static str, config_path: &Path, config_bytes: &[u8], seed: u64, threads: usize) -> Self {
        Self {
            tool: "sumset",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_path: config_path.to_path_buf(),
            config_sha256: sha256_hex(config_bytes),
            seed,
            threads,
            parameters: serde_json::Value::Null,
            started_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            stage_timings: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Write `contents` to `dir/name` and record it.
    pub fn write(&mut self, dir: &Path, name: &str, contents: &[u8]) -> std::io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        self.outputs.push(OutputFile {
            path,
            sha256: sha256_hex(contents),
            bytes: contents.len(),
        });
        Ok(())
    }

    pub fn save(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(dir.join("manifest.json"), text + "\n")
    }
}

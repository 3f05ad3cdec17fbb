use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Self { path: path.to_path_buf(), sha256: hex::encode(Sha256::digest(&bytes)) })
    }
}

/// Sidecar record written next to every file a command produces.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub tool_version: &'static str,
    pub started_unix_ms: u128,
    pub wall_clock_ms: u128,
}

pub struct ManifestBuilder {
    command: &'static str,
    params: serde_json::Value,
    inputs: Vec<PathBuf>,
    started: SystemTime,
}

impl ManifestBuilder {
    pub fn start(command: &'static str, params: impl Serialize) -> Self {
        Self {
            command,
            params: serde_json::to_value(params).unwrap_or(serde_json::Value::Null),
            inputs: Vec::new(),
            started: SystemTime::now(),
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    /// Writes `<first output>.manifest.json`. No-op without outputs.
    pub fn finish(self, outputs: &[&Path]) -> Result<()> {
        let Some(first) = outputs.first() else {
            return Ok(());
        };
        let elapsed = self.started.elapsed().unwrap_or(Duration::ZERO);
        let manifest = RunManifest {
            command: self.command.to_string(),
            params: self.params,
            inputs: self.inputs.iter().map(|p| FileDigest::of(p)).collect::<Result<_>>()?,
            outputs: outputs.iter().map(|p| FileDigest::of(p)).collect::<Result<_>>()?,
            tool_version: env!("CARGO_PKG_VERSION"),
            started_unix_ms: self
                .started
                .duration_since(UNIX_EPOCH)
                .unwrap_or(Duration::ZERO)
                .as_millis(),
            wall_clock_ms: elapsed.as_millis(),
        };
        let path = manifest_path(first);
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

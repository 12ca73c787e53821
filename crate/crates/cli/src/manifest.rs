use std::fs;
use std::path::{Path, PathBuf};

use cfmimo::export::serialize_f64_slice;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ArtifactEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct SweepEntry {
    pub parameter: &'static str,
    #[serde(serialize_with = "serialize_f64_slice")]
    pub values: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool_version: &'static str,
    pub scenario: String,
    pub scenario_checksum: String,
    pub seed: u64,
    pub experiment: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepEntry>,
    pub artifacts: Vec<ArtifactEntry>,
}

/// In-memory artifacts, written out together with their manifest.
#[derive(Debug, Default)]
pub struct ArtifactSet {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl ArtifactSet {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((path.into(), bytes));
    }

    pub fn extend_under(&mut self, dir: &str, other: ArtifactSet) {
        for (path, bytes) in other.files {
            self.files.push((Path::new(dir).join(path), bytes));
        }
    }

    /// Writes every artifact under `out`, then the manifest describing them.
    pub fn write(self, out: &Path, mut manifest: Manifest) -> Result<(), CliError> {
        let io_err = |path: &Path, e: std::io::Error| {
            CliError::Output(format!("cannot write {}: {e}", path.display()))
        };
        for (rel, bytes) in &self.files {
            let path = out.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
            }
            fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
            manifest.artifacts.push(ArtifactEntry {
                path: rel
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/"),
                sha256: sha256_hex(bytes),
            });
        }
        let mut text =
            serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Output(e.to_string()))?;
        text.push(b'\n');
        let path = out.join(MANIFEST_FILE);
        fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
        fs::write(&path, text).map_err(|e| io_err(&path, e))
    }
}

//! Run manifest and staged output writing.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to replay a run. Only `durations` varies between
/// identical invocations.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub flags: BTreeMap<String, Value>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub durations: BTreeMap<String, f64>,
    pub version: String,
}

/// Collects inputs, timings and outputs for one run. Outputs are held in
/// memory until [`Run::commit`], so a failed run leaves no partial files.
pub struct Run {
    manifest: RunManifest,
    staged: Vec<(PathBuf, Vec<u8>)>,
    clock: Instant,
}

impl Run {
    pub fn new(subcommand: &str) -> Self {
        Self {
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                flags: BTreeMap::new(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                durations: BTreeMap::new(),
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            staged: Vec::new(),
            clock: Instant::now(),
        }
    }

    pub fn flag(&mut self, name: &str, value: impl Into<Value>) {
        self.manifest.flags.insert(name.to_string(), value.into());
    }

    /// Reads `path`, recording its digest.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.manifest.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(bytes)
    }

    /// Records the time since the previous lap under `stage`.
    pub fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.manifest
            .durations
            .insert(stage.to_string(), (now - self.clock).as_secs_f64());
        self.clock = now;
    }

    pub fn stage(&mut self, path: &Path, bytes: Vec<u8>) {
        self.manifest.outputs.push(path.display().to_string());
        self.staged.push((path.to_path_buf(), bytes));
    }

    /// Writes every staged output and then the manifest. Files go to a
    /// temporary sibling first and are renamed once all writes succeeded.
    pub fn commit(mut self, manifest_path: &Path) -> Result<(), CliError> {
        self.lap("write");
        let json = serde_json::to_vec_pretty(&self.manifest).expect("manifest serializes");
        self.staged.push((manifest_path.to_path_buf(), json));
        let mut written: Vec<PathBuf> = Vec::new();
        let cleanup = |tmps: &[PathBuf]| {
            for t in tmps {
                let _ = fs::remove_file(t);
            }
        };
        for (path, bytes) in &self.staged {
            let tmp = temp_sibling(path);
            if let Err(e) = fs::write(&tmp, bytes) {
                cleanup(&written);
                return Err(CliError::io(path, e));
            }
            written.push(tmp);
        }
        for ((path, _), tmp) in self.staged.iter().zip(&written) {
            if let Err(e) = fs::rename(tmp, path) {
                cleanup(&written);
                return Err(CliError::io(path, e));
            }
        }
        Ok(())
    }
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

/// `<primary output>.manifest.json`.
pub fn manifest_for(primary: &Path) -> PathBuf {
    let mut name = primary.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    primary.with_file_name(name)
}

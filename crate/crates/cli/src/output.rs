//! Output directory bookkeeping and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use pvlab::PvError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentStatus {
    pub name: String,
    pub tainted: bool,
    pub boundary_touch_fraction: f64,
    /// Replicates dropped by the estimator (slab cap contact).
    pub discarded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub kind: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed_root: String,
    pub code_version: String,
    pub started: String,
    pub finished: String,
    pub threads: Option<usize>,
    pub experiments: Vec<ExperimentStatus>,
    pub files: Vec<OutputFile>,
}

pub const MANIFEST: &str = "manifest.json";

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Collects files written under one directory; every file carries the
/// config hash (CSV metadata line, JSON field, SVG metadata element).
pub struct OutputDir {
    root: PathBuf,
    pub config_hash: String,
    files: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(root: &Path, config_hash: &str) -> Result<Self, PvError> {
        fs::create_dir_all(root).map_err(|e| PvError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            config_hash: config_hash.to_string(),
            files: Vec::new(),
        })
    }

    /// Continues a directory whose manifest already lists `files`.
    pub fn resume(root: &Path, config_hash: &str, files: Vec<OutputFile>) -> Self {
        OutputDir {
            root: root.to_path_buf(),
            config_hash: config_hash.to_string(),
            files,
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, kind: &str, contents: &[u8]) -> Result<PathBuf, PvError> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| PvError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.files.retain(|f| f.path != name);
        self.files.push(OutputFile {
            path: name.to_string(),
            kind: kind.to_string(),
            bytes: contents.len() as u64,
        });
        Ok(path)
    }

    /// Writes `value` as pretty JSON wrapped with the config hash.
    pub fn write_json<T: Serialize>(&mut self, name: &str, kind: &str, value: &T) -> Result<PathBuf, PvError> {
        let body = serde_json::json!({
            "config_hash": self.config_hash,
            "kind": kind,
            "data": value,
        });
        let text = serde_json::to_string_pretty(&body)? + "\n";
        self.write(name, kind, text.as_bytes())
    }

    pub fn finish(self, mut manifest: RunManifest) -> Result<RunManifest, PvError> {
        manifest.config_hash = self.config_hash.clone();
        manifest.files = self.files;
        manifest.finished = now();
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        let path = self.root.join(MANIFEST);
        fs::write(&path, text).map_err(|e| PvError::Io(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}

/// Reads a JSON file written by [`OutputDir::write_json`], returning the
/// config hash and the payload.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(String, T), PvError> {
    let text = fs::read_to_string(path).map_err(|e| PvError::Io(format!("cannot read {}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let hash = v
        .get("config_hash")
        .and_then(|h| h.as_str())
        .ok_or_else(|| PvError::Data(format!("{} has no config_hash", path.display())))?
        .to_string();
    let data = v
        .get("data")
        .cloned()
        .ok_or_else(|| PvError::Data(format!("{} has no data", path.display())))?;
    Ok((hash, serde_json::from_value(data)?))
}

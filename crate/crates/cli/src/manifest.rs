//! Run directory writer and manifest.
//!
//! Every output file goes through `RunWriter` so the manifest can list each
//! one with its SHA-256. The recorded `run_hash` covers the config hash,
//! seed, and the sorted file digests; the wall-clock timestamp is kept out
//! of it so identical runs hash identically.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::config::hex_string;
use crate::error::{CliError, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub timestamp_unix: u64,
    pub stages: Vec<String>,
    pub files: Vec<FileRecord>,
    /// SHA-256 over (version, config hash, seed, sorted file digests).
    pub run_hash: String,
}

pub struct RunWriter {
    root: PathBuf,
    files: Vec<FileRecord>,
    stages: Vec<String>,
}

impl RunWriter {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(RunWriter { root: root.to_path_buf(), files: Vec::new(), stages: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn begin_stage(&mut self, name: &str) {
        self.stages.push(name.to_string());
    }

    /// Write one output file (path relative to the run root) and record it.
    pub fn write(&mut self, relative: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        self.files.push(FileRecord {
            path: relative.to_string(),
            sha256: hex_string(&hasher.finalize()),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// Mark the run directory as failed at the given stage, keeping partial
    /// outputs inspectable.
    pub fn mark_failed(&self, stage: &str, error: &CliError) {
        let marker = self.root.join("FAILED");
        let _ = std::fs::write(&marker, format!("stage: {stage}\nerror: {error}\n"));
    }

    /// Compute the run hash, write `manifest.json`, and return the manifest.
    pub fn finish(mut self, config_hash: &str, seed: u64) -> Result<Manifest> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let mut hasher = Sha256::new();
        hasher.update(format!("v{MANIFEST_VERSION}\n"));
        hasher.update(config_hash.as_bytes());
        hasher.update(format!("\nseed={seed}\n"));
        for f in &self.files {
            hasher.update(format!("{} {}\n", f.path, f.sha256));
        }
        let run_hash = hex_string(&hasher.finalize());
        let manifest = Manifest {
            manifest_version: MANIFEST_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash.to_string(),
            seed,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            stages: self.stages.clone(),
            files: self.files.clone(),
            run_hash,
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::data(format!("manifest serialization failed: {e}")))?;
        text.push('\n');
        std::fs::write(self.root.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

pub fn read_manifest(root: &Path) -> Result<Manifest> {
    let bytes = std::fs::read(root.join("manifest.json"))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::data(format!("cannot parse manifest: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_hash_ignores_timestamp_but_not_content() {
        let dir = tempfile::tempdir().unwrap();
        let write_run = |sub: &str, payload: &[u8]| -> Manifest {
            let mut w = RunWriter::create(&dir.path().join(sub)).unwrap();
            w.begin_stage("ingest");
            w.write("a.csv", payload).unwrap();
            w.write("sub/b.csv", b"two").unwrap();
            w.finish("confighash", 7).unwrap()
        };
        let m1 = write_run("r1", b"one");
        std::thread::sleep(std::time::Duration::from_millis(5));
        let m2 = write_run("r2", b"one");
        let m3 = write_run("r3", b"ONE");
        assert_eq!(m1.run_hash, m2.run_hash);
        assert_ne!(m1.run_hash, m3.run_hash);
        assert_eq!(m1.files.len(), 2);
    }

    #[test]
    fn manifest_lists_every_written_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = RunWriter::create(dir.path()).unwrap();
        w.write("x/y/z.txt", b"payload").unwrap();
        let manifest = w.finish("h", 1).unwrap();
        assert_eq!(manifest.files[0].path, "x/y/z.txt");
        assert_eq!(manifest.files[0].bytes, 7);
        let back = read_manifest(dir.path()).unwrap();
        assert_eq!(back.run_hash, manifest.run_hash);
    }
}

//! Buffered outputs, atomic writes and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Files produced by one command, held in memory until everything has
/// been computed so a failure never leaves a partial set behind.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub file: String,
    pub sha256: String,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        debug_assert!(self.files.iter().all(|(n, _)| n != name), "duplicate output {name}");
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_csv(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut Vec<u8>) -> fbgforce::Result<()>,
    ) -> CliResult<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let text = fbgforce::io::to_json_pretty(value)?;
        self.add(name, text.into_bytes());
        Ok(())
    }

    pub fn entries(&self) -> Vec<FileEntry> {
        self.files
            .iter()
            .map(|(file, bytes)| FileEntry {
                file: file.clone(),
                sha256: sha256_hex(bytes),
            })
            .collect()
    }

    /// Writes every file into `dir`, each through a temp file and rename.
    pub fn commit(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            write_atomic(&path, bytes).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Record of how a set of outputs was produced. Holds no timestamps so
/// two identical runs produce identical manifests.
#[derive(Debug, Serialize)]
pub struct Manifest<C: Serialize> {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub config_sha256: String,
    pub config: C,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
}

impl<C: Serialize> Manifest<C> {
    pub fn new(command: &'static str, seed: Option<u64>, config: C, inputs: Vec<FileEntry>) -> CliResult<Self> {
        let canonical = serde_json::to_vec(&config).map_err(fbgforce::Error::from)?;
        Ok(Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config_sha256: sha256_hex(&canonical),
            config,
            inputs,
            outputs: Vec::new(),
        })
    }
}

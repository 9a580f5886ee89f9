//! Output directory: atomic file writes, content hashes, the stage manifest
//! and the lock file.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";
pub const LOCK: &str = ".lock";

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256(&bytes))
}

/// Writes `bytes` to a sibling temp file, syncs it and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes)
        .and_then(|_| f.sync_all())
        .map_err(|e| CliError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Accumulates a stage's input fingerprint.
#[derive(Default)]
pub struct Fingerprint {
    hasher: Sha256,
}

impl Fingerprint {
    pub fn add(&mut self, label: &str, value: &str) {
        for part in [label, value] {
            self.hasher.update((part.len() as u64).to_le_bytes());
            self.hasher.update(part.as_bytes());
        }
    }

    pub fn add_file(&mut self, label: &str, path: &Path) -> CliResult<()> {
        let h = hash_file(path)?;
        self.add(label, &h);
        Ok(())
    }

    pub fn finish(self) -> String {
        hex(&self.hasher.finalize())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub inputs: String,
    /// Output file (relative to the output directory) to content hash.
    pub outputs: BTreeMap<String, String>,
    pub report: StageReport,
}

/// Row counts and warning counters of one stage run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub rows: BTreeMap<String, u64>,
    pub warnings: BTreeMap<String, u64>,
}

impl StageReport {
    pub fn row(&mut self, key: &str, n: usize) {
        self.rows.insert(key.to_string(), n as u64);
    }

    pub fn warn(&mut self, key: &str, n: usize) {
        if n > 0 {
            *self.warnings.entry(key.to_string()).or_default() += n as u64;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stages: BTreeMap<String, StageRecord>,
}

impl Manifest {
    pub fn load(out: &Path) -> CliResult<Self> {
        let path = out.join(MANIFEST);
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(Manifest::default()),
            Err(e) => Err(CliError::io(&path, e)),
        }
    }

    pub fn save(&self, out: &Path) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        write_atomic(&out.join(MANIFEST), &bytes)
    }

    /// The stored record when its inputs match and every output is unchanged on disk.
    pub fn fresh(&self, out: &Path, stage: &str, inputs: &str) -> Option<&StageRecord> {
        let rec = self.stages.get(stage)?;
        if rec.inputs != inputs {
            return None;
        }
        let intact = rec
            .outputs
            .iter()
            .all(|(name, h)| hash_file(&out.join(name)).is_ok_and(|cur| &cur == h));
        intact.then_some(rec)
    }
}

/// Exclusive ownership of an output directory, released on drop.
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(out: &Path) -> CliResult<Self> {
        fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let path = out.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(OutputLock { path })
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(CliError::Usage(format!(
                "{} exists: another run owns this output directory (delete the file if that run is gone)",
                path.display()
            ))),
            Err(e) => Err(CliError::io(&path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

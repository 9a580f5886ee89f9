use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::ProbeResult;
use crate::error::{Error, Result};

/// Append-only probe store. Later lines for a URL supersede earlier ones.
#[derive(Debug, Default)]
pub struct ProbeCache {
    entries: HashMap<String, ProbeResult>,
    sink: Option<(PathBuf, File)>,
}

impl ProbeCache {
    /// Cache that lives only in memory.
    pub fn in_memory() -> Self {
        ProbeCache::default()
    }

    /// Loads `path` if it exists and opens it for appending.
    /// Fails if the file cannot be written.
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            for (idx, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<ProbeResult>(&line) {
                    Ok(r) => {
                        entries.insert(r.canonical.clone(), r);
                    }
                    // A torn last line from an interrupted run is dropped.
                    Err(e) if e.is_eof() => {}
                    Err(e) => {
                        return Err(Error::Record {
                            path: path.to_path_buf(),
                            line: idx + 1,
                            message: e.to_string(),
                        })
                    }
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(ProbeCache {
            entries,
            sink: Some((path.to_path_buf(), file)),
        })
    }

    pub fn get(&self, canonical: &str) -> Option<&ProbeResult> {
        self.entries.get(canonical)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Current results sorted by canonical URL.
    pub fn results(&self) -> Vec<&ProbeResult> {
        let mut out: Vec<_> = self.entries.values().collect();
        out.sort_by(|a, b| a.canonical.cmp(&b.canonical));
        out
    }

    /// Records a result and, for file-backed caches, appends and flushes it.
    pub fn append(&mut self, result: ProbeResult) -> Result<()> {
        if let Some((path, file)) = &mut self.sink {
            let mut line = serde_json::to_vec(&result).expect("probe result serializes");
            line.push(b'\n');
            file.write_all(&line)
                .and_then(|_| file.flush())
                .map_err(|e| Error::io(path.as_path(), e))?;
        }
        self.entries.insert(result.canonical.clone(), result);
        Ok(())
    }
}

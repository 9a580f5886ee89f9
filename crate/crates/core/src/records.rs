//! Line-delimited interchange records.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LinkClass;

/// One line of the mention file.
///
/// Written by extraction with `class`, `confidence` and `classifier_id` set
/// to `null`; classification fills them in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub paper_id: String,
    pub url_raw: String,
    pub canonical: String,
    pub domain: String,
    pub class: Option<LinkClass>,
    pub confidence: Option<f64>,
    pub classifier_id: Option<String>,
    pub section: String,
    pub paragraph_index: usize,
    pub paragraph_count: usize,
    pub in_footnote: bool,
    pub context_sentence: String,
}

impl MentionRecord {
    pub fn position_fraction(&self) -> f64 {
        self.paragraph_index as f64 / self.paragraph_count as f64
    }

    /// Positional decile, 0 (first tenth) to 9 (last tenth).
    pub fn decile(&self) -> usize {
        ((10 * self.paragraph_index) / self.paragraph_count.max(1)).min(9)
    }
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| Error::Record {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(mut w: W, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

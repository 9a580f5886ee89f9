//! Line-delimited paper metadata.
//!
//! One JSON object per line:
//!
//! ```text
//! {"paper_id": "1501.00001", "submit_date": "2015-01-02", "field": "cs", "citation_count": 12}
//! ```
//!
//! `submit_date` is ISO 8601; a bare year (`2015`) or year-month (`2015-01`)
//! resolves to the first day of that period.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{Field, PaperMeta};

#[derive(Debug, Deserialize)]
struct RawRecord {
    paper_id: String,
    submit_date: String,
    field: String,
    citation_count: i64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedMetadata {
    pub papers: Vec<PaperMeta>,
    /// Records whose field is not one of cs, math, physics.
    pub dropped: usize,
}

pub fn load_metadata(path: &Path) -> Result<LoadedMetadata> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metadata(&text, path)
}

/// Parses metadata text. `origin` is only used in error messages.
pub fn parse_metadata(text: &str, origin: &Path) -> Result<LoadedMetadata> {
    let mut out = LoadedMetadata::default();
    let mut seen = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Record {
            path: origin.to_path_buf(),
            line: line_no,
            message,
        };
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        if raw.paper_id.trim().is_empty() {
            return Err(bad("empty paper_id".into()));
        }
        if raw.citation_count < 0 {
            return Err(bad(format!("negative citation_count {}", raw.citation_count)));
        }
        let submit_date = parse_submit_date(&raw.submit_date)
            .ok_or_else(|| bad(format!("unparseable submit_date `{}`", raw.submit_date)))?;
        if !seen.insert(raw.paper_id.clone()) {
            return Err(Error::DuplicatePaper(raw.paper_id));
        }
        let Some(field) = Field::from_code(&raw.field) else {
            out.dropped += 1;
            continue;
        };
        out.papers.push(PaperMeta {
            paper_id: raw.paper_id,
            submit_date,
            field,
            citation_count: raw.citation_count as u64,
        });
    }
    Ok(out)
}

/// Full date when present, otherwise January 1 (or the first of the month).
pub fn parse_submit_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    // Datetimes: keep the calendar date part.
    let date_part = s.split(['T', ' ']).next().unwrap_or(s);
    let parts: Vec<&str> = date_part.split('-').collect();
    let num = |p: &str| -> Option<u32> {
        if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        p.parse().ok()
    };
    match parts.as_slice() {
        [y] if y.len() == 4 => NaiveDate::from_ymd_opt(num(y)? as i32, 1, 1),
        [y, m] if y.len() == 4 => NaiveDate::from_ymd_opt(num(y)? as i32, num(m)?, 1),
        [y, m, d] if y.len() == 4 => NaiveDate::from_ymd_opt(num(y)? as i32, num(m)?, num(d)?),
        _ => None,
    }
}

//! Loading paper metadata and turning LaTeX sources into sectioned documents.

mod latex;
mod metadata;
mod sentences;

use std::fs;
use std::path::{Path, PathBuf};

pub use latex::{
    parse_latex, Origin, Paragraph, ParsedDocument, Section, CITE_PLACEHOLDER, FRONT_SECTION,
    MATH_PLACEHOLDER, REF_PLACEHOLDER,
};
pub use metadata::{load_metadata, parse_metadata, parse_submit_date, LoadedMetadata};
pub use sentences::{segment_sentences, sentence_text};

use crate::error::{Error, Result};

/// Path of a paper's source under the corpus root: `<root>/<paper_id>.tex`.
pub fn source_path(corpus_root: &Path, paper_id: &str) -> PathBuf {
    corpus_root.join(format!("{paper_id}.tex"))
}

/// Reads and parses one paper's source. Invalid UTF-8 is replaced, not rejected.
pub fn load_document(corpus_root: &Path, paper_id: &str) -> Result<ParsedDocument> {
    let path = source_path(corpus_root, paper_id);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let source = String::from_utf8_lossy(&bytes);
    Ok(parse_latex(&source, paper_id))
}

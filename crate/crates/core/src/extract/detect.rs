use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ingest::{segment_sentences, sentence_text, ParsedDocument};

static BARE_URL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)\b(?:https?://|ftp://|www\.)[^\s<>"{}|\\^`\[\]]+"#).expect("valid regex")
});

/// One URL occurrence, before normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawLinkHit {
    pub paper_id: String,
    pub url_raw: String,
    pub context_sentence: String,
    pub section_heading: String,
    pub paragraph_index: usize,
    pub paragraph_count: usize,
    pub in_footnote: bool,
    /// Byte range of `url_raw` within its paragraph.
    pub char_span: Range<usize>,
}

/// Finds every URL mention in a parsed document, in document order.
///
/// Sources are `\url` arguments, `\href` targets and bare tokens starting
/// with `http://`, `https://`, `ftp://` or `www.`. Repeated mentions of the
/// same URL are kept as separate hits; `mailto:` targets are skipped.
pub fn detect_urls(doc: &ParsedDocument) -> Vec<RawLinkHit> {
    let mut hits = Vec::new();
    for (index, heading, para) in doc.paragraphs() {
        let text = para.text.as_str();
        let mut spans: Vec<Range<usize>> = para
            .url_spans
            .iter()
            .filter(|s| !text[(*s).clone()].to_ascii_lowercase().starts_with("mailto:"))
            .cloned()
            .collect();
        for m in BARE_URL.find_iter(text) {
            let overlaps = para
                .url_spans
                .iter()
                .any(|s| m.start() < s.end && s.start < m.end());
            if !overlaps {
                spans.push(m.range());
            }
        }
        spans.sort_by_key(|s| s.start);
        if spans.is_empty() {
            continue;
        }
        let sentences = segment_sentences(text);
        for span in spans {
            let sentence = sentences
                .iter()
                .find(|s| s.start <= span.start && span.start < s.end)
                .map_or(text.trim(), |s| sentence_text(text, s));
            hits.push(RawLinkHit {
                paper_id: doc.paper_id.clone(),
                url_raw: text[span.clone()].to_string(),
                context_sentence: sentence.to_string(),
                section_heading: heading.to_string(),
                paragraph_index: index,
                paragraph_count: doc.paragraph_count,
                in_footnote: para.in_footnote(&span),
                char_span: span,
            });
        }
    }
    hits
}

//! URL detection, normalization and registrable domains.

mod detect;
mod domain;
mod normalize;

pub use detect::{detect_urls, RawLinkHit};
pub use domain::registrable_domain;
pub use normalize::{normalize_url, NormalizedUrl, Rejection, Scheme};

use crate::ingest::ParsedDocument;
use crate::records::MentionRecord;

/// A detected URL with its normalized form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMention {
    pub hit: RawLinkHit,
    pub url: NormalizedUrl,
}

impl LinkMention {
    /// Paragraph index over paragraph count; 0 only in the first paragraph.
    pub fn position_fraction(&self) -> f64 {
        self.hit.paragraph_index as f64 / self.hit.paragraph_count as f64
    }

    pub fn to_record(&self) -> MentionRecord {
        MentionRecord {
            paper_id: self.hit.paper_id.clone(),
            url_raw: self.hit.url_raw.clone(),
            canonical: self.url.canonical.clone(),
            domain: self.url.domain.clone(),
            class: None,
            confidence: None,
            classifier_id: None,
            section: self.hit.section_heading.clone(),
            paragraph_index: self.hit.paragraph_index,
            paragraph_count: self.hit.paragraph_count,
            in_footnote: self.hit.in_footnote,
            context_sentence: self.hit.context_sentence.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extraction {
    pub mentions: Vec<LinkMention>,
    /// Hits dropped because normalization found no usable URL.
    pub rejected: usize,
}

/// Detects and normalizes every URL mention of a document.
pub fn extract_mentions(doc: &ParsedDocument) -> Extraction {
    let mut out = Extraction::default();
    for hit in detect_urls(doc) {
        match normalize_url(&hit.url_raw) {
            Ok(url) => out.mentions.push(LinkMention { hit, url }),
            Err(_) => out.rejected += 1,
        }
    }
    out
}

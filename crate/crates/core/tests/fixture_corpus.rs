use std::path::{Path, PathBuf};

use linkmine::classify::classify_records_lexicon;
use linkmine::extract::extract_mentions;
use linkmine::ingest::{load_document, load_metadata};
use linkmine::records::read_jsonl;
use linkmine::MentionRecord;
use serde::Deserialize;

#[derive(Debug, Deserialize, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Planted {
    paper_id: String,
    canonical: String,
    context_sentence: String,
    class: String,
    in_footnote: bool,
    section: String,
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn extract_all() -> Vec<MentionRecord> {
    let root = fixtures();
    let meta = load_metadata(&root.join("metadata.jsonl")).unwrap();
    assert_eq!(meta.papers.len(), 20);
    assert_eq!(meta.dropped, 1);
    let mut records = Vec::new();
    for p in &meta.papers {
        let doc = load_document(&root.join("corpus"), &p.paper_id).unwrap();
        let ex = extract_mentions(&doc);
        assert_eq!(ex.rejected, 0, "{}", p.paper_id);
        records.extend(ex.mentions.iter().map(|m| m.to_record()));
    }
    classify_records_lexicon(&mut records);
    records
}

#[test]
fn planted_mentions_are_recovered_exactly() {
    let mut want: Vec<Planted> = read_jsonl(&fixtures().join("planted.jsonl")).unwrap();
    let mut got: Vec<Planted> = extract_all()
        .into_iter()
        .map(|r| Planted {
            paper_id: r.paper_id,
            canonical: r.canonical,
            context_sentence: r.context_sentence,
            class: r.class.unwrap().label().to_string(),
            in_footnote: r.in_footnote,
            section: r.section,
        })
        .collect();
    want.sort();
    got.sort();
    let missing: Vec<_> = want.iter().filter(|w| !got.contains(w)).collect();
    let extra: Vec<_> = got.iter().filter(|g| !want.contains(g)).collect();
    assert!(missing.is_empty() && extra.is_empty(), "missing {missing:#?}\nextra {extra:#?}");
    assert!(want.len() >= 60);
}

//! Mention classification into data, methods and supplement links.

mod eval;
mod external;
mod lexicon;

pub use eval::{
    evaluate, fold_assignment, kfold_evaluate, ClassMetrics, EvalReport, KFoldReport,
    LabeledExample,
};
pub use external::{ClassifyItem, ExternalSession, ItemLabel, DEFAULT_IDLE_TIMEOUT};
pub use lexicon::{
    classify_lexicon, CONTEXT_CUE_CONFIDENCE, DEFAULT_CONFIDENCE, HOST_CUE_CONFIDENCE,
    LEXICON_CLASSIFIER_ID, URL_MARKER,
};

use crate::records::MentionRecord;

/// Labels every record with the lexicon classifier.
pub fn classify_records_lexicon(records: &mut [MentionRecord]) {
    for r in records {
        let (class, confidence) = classify_lexicon(&r.context_sentence, Some(&r.url_raw), &r.domain);
        r.class = Some(class);
        r.confidence = Some(confidence);
        r.classifier_id = Some(LEXICON_CLASSIFIER_ID.to_string());
    }
}

/// Labels every record through an external classifier, `batch_size` records
/// per exchange. Returns the number of lexicon fallbacks.
pub fn classify_records_external(
    records: &mut [MentionRecord],
    session: &mut ExternalSession,
    classifier_id: &str,
    batch_size: usize,
) -> usize {
    let before = session.fallbacks;
    let batch_size = batch_size.max(1);
    for (b, chunk) in records.chunks_mut(batch_size).enumerate() {
        let items: Vec<ClassifyItem> = chunk
            .iter()
            .enumerate()
            .map(|(i, r)| ClassifyItem {
                id: (b * batch_size + i).to_string(),
                url: r.canonical.clone(),
                context: r.context_sentence.clone(),
                section: r.section.clone(),
                url_raw: r.url_raw.clone(),
                domain: r.domain.clone(),
            })
            .collect();
        let labels = session.classify(&items);
        for (r, label) in chunk.iter_mut().zip(labels) {
            r.class = Some(label.class);
            r.confidence = Some(label.confidence);
            r.classifier_id = Some(if label.fallback {
                LEXICON_CLASSIFIER_ID.to_string()
            } else {
                classifier_id.to_string()
            });
        }
    }
    session.fallbacks - before
}

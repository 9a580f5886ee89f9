//! Cue-word classifier over the mention context.
//!
//! The cue word closest to the URL decides the class (Methods on an exact
//! tie). Without a context cue the URL's domain is consulted, and without
//! either the mention is a supplement.

use std::ops::Range;

use crate::model::LinkClass;

pub const LEXICON_CLASSIFIER_ID: &str = "lexicon-v1";

pub const CONTEXT_CUE_CONFIDENCE: f64 = 0.9;
pub const HOST_CUE_CONFIDENCE: f64 = 0.6;
pub const DEFAULT_CONFIDENCE: f64 = 0.5;

const METHODS_CUES: &[&str] = &[
    "code", "codes", "implementation", "implementations", "software", "tool", "tools",
    "toolkit", "toolkits", "library", "libraries", "package", "packages", "repository",
    "repositories", "script", "scripts",
];

const DATA_CUES: &[&str] = &[
    "data", "dataset", "datasets", "corpus", "corpora", "database", "databases", "benchmark",
    "benchmarks", "annotation", "annotations", "sample", "samples", "measurement",
    "measurements",
];

const DATA_HOSTS: &[&str] = &["zenodo.org", "figshare.com", "kaggle.com"];
const METHODS_HOSTS: &[&str] = &["github.com", "gitlab.com", "bitbucket.org"];

/// Marker accepted in place of a literal URL inside a context.
pub const URL_MARKER: &str = "[URL]";

fn cue_class(word: &str) -> Option<LinkClass> {
    if METHODS_CUES.contains(&word) {
        Some(LinkClass::Methods)
    } else if DATA_CUES.contains(&word) {
        Some(LinkClass::Data)
    } else {
        None
    }
}

/// Classifies one mention context.
///
/// `url_text` is the URL as it appears in `context`; when it cannot be found
/// the `[URL]` marker is tried, and failing that the URL is assumed to close
/// the sentence. `domain` is the registrable domain of the URL.
pub fn classify_lexicon(context: &str, url_text: Option<&str>, domain: &str) -> (LinkClass, f64) {
    let url_range = locate_url(context, url_text);
    let words: Vec<_> = words(context)
        .into_iter()
        .filter(|(_, span)| {
            url_range
                .as_ref()
                .is_none_or(|r| span.end <= r.start || r.end <= span.start)
        })
        .collect();

    let url_gap = match &url_range {
        Some(r) => words.iter().filter(|(_, w)| w.end <= r.start).count(),
        None => words.len(),
    };
    let mut best: Option<(usize, LinkClass)> = None;
    for (j, (word, _)) in words.iter().enumerate() {
        let Some(class) = cue_class(word) else {
            continue;
        };
        let distance = if j < url_gap { url_gap - j } else { j - url_gap + 1 };
        best = match best {
            None => Some((distance, class)),
            Some((d, _)) if distance < d => Some((distance, class)),
            Some((d, c)) if distance == d && c != class => Some((d, LinkClass::Methods)),
            keep => keep,
        };
    }
    if let Some((_, class)) = best {
        return (class, CONTEXT_CUE_CONFIDENCE);
    }
    let domain = domain.to_ascii_lowercase();
    if DATA_HOSTS.contains(&domain.as_str()) {
        (LinkClass::Data, HOST_CUE_CONFIDENCE)
    } else if METHODS_HOSTS.contains(&domain.as_str()) {
        (LinkClass::Methods, HOST_CUE_CONFIDENCE)
    } else {
        (LinkClass::Supplement, DEFAULT_CONFIDENCE)
    }
}

fn locate_url(context: &str, url_text: Option<&str>) -> Option<Range<usize>> {
    url_text
        .filter(|u| !u.is_empty())
        .and_then(|u| context.find(u).map(|i| i..i + u.len()))
        .or_else(|| context.find(URL_MARKER).map(|i| i..i + URL_MARKER.len()))
}

/// Lowercased alphanumeric words with their byte spans.
fn words(context: &str) -> Vec<(String, Range<usize>)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in context.char_indices().chain(std::iter::once((context.len(), ' '))) {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((context[s..i].to_lowercase(), s..i));
                start = None;
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn release_code_is_methods() {
        let (class, conf) = classify_lexicon("we release our code at [URL]", None, "example.org");
        assert_eq!(class, LinkClass::Methods);
        assert_eq!(conf, CONTEXT_CUE_CONFIDENCE);
    }

    #[test]
    fn dataset_download_is_data() {
        let got = classify_lexicon("The dataset can be downloaded at [URL]", None, "x.org");
        assert_eq!(got, (LinkClass::Data, 0.9));
    }

    #[test]
    fn press_coverage_is_supplement() {
        let got = classify_lexicon("See the press coverage at [URL]", None, "nytimes.com");
        assert_eq!(got, (LinkClass::Supplement, 0.5));
    }

    #[test]
    fn host_cues() {
        assert_eq!(
            classify_lexicon("Available at [URL].", None, "zenodo.org"),
            (LinkClass::Data, 0.6)
        );
        assert_eq!(
            classify_lexicon("Available at [URL].", None, "github.com"),
            (LinkClass::Methods, 0.6)
        );
    }

    #[test]
    fn nearest_cue_wins() {
        // "data" is 1 word from the URL, "code" 4 words away.
        let ctx = "Our code is public and the data at http://x.org/d is too.";
        assert_eq!(
            classify_lexicon(ctx, Some("http://x.org/d"), "x.org").0,
            LinkClass::Data
        );
        let ctx = "The data is shared; code at http://x.org/c as well.";
        assert_eq!(
            classify_lexicon(ctx, Some("http://x.org/c"), "x.org").0,
            LinkClass::Methods
        );
    }

    #[test]
    fn tie_goes_to_methods() {
        let ctx = "Data [URL] code";
        assert_eq!(classify_lexicon(ctx, None, "x.org").0, LinkClass::Methods);
        let ctx = "code and data at [URL]";
        // data is nearer
        assert_eq!(classify_lexicon(ctx, None, "x.org").0, LinkClass::Data);
    }

    #[test]
    fn words_inside_the_url_are_ignored() {
        let ctx = "See http://x.org/dataset-code for details.";
        assert_eq!(
            classify_lexicon(ctx, Some("http://x.org/dataset-code"), "x.org").0,
            LinkClass::Supplement
        );
    }

    #[test]
    fn same_url_different_contexts() {
        let url = "https://zenodo.org/record/1";
        let m = format!("Our scripts are archived at {url}.");
        let d = format!("The measurements are archived at {url}.");
        assert_eq!(classify_lexicon(&m, Some(url), "zenodo.org").0, LinkClass::Methods);
        assert_eq!(classify_lexicon(&d, Some(url), "zenodo.org").0, LinkClass::Data);
    }

    #[test]
    fn url_missing_from_context_is_placed_at_end() {
        let ctx = "code and then many other words before data";
        assert_eq!(classify_lexicon(ctx, Some("http://nowhere"), "x.org").0, LinkClass::Data);
    }
}

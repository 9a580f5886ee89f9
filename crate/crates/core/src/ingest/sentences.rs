//! Sentence segmentation for plain-text paragraphs.

use std::ops::Range;

const TERMINATORS: [char; 3] = ['.', '?', '!'];
const CLOSERS: [char; 5] = [')', ']', '"', '\'', '}'];

/// Splits a paragraph into sentence spans (byte ranges).
///
/// A sentence ends at `.`, `?` or `!` (plus any closing quotes or brackets)
/// followed by whitespace; the trailing whitespace belongs to the sentence it
/// follows, so the spans tile the paragraph exactly. A period closing a
/// single-letter abbreviation (`J.`, `e.g.`) does not end a sentence.
/// Boundaries only fall on whitespace, so no URL token is ever split.
pub fn segment_sentences(paragraph: &str) -> Vec<Range<usize>> {
    if paragraph.is_empty() {
        return Vec::new();
    }
    let chars: Vec<(usize, char)> = paragraph.char_indices().collect();
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (at, c) = chars[i];
        if !TERMINATORS.contains(&c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        if j >= chars.len() || !chars[j].1.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '.' && is_abbreviation(paragraph, at) {
            i = j;
            continue;
        }
        while j < chars.len() && chars[j].1.is_whitespace() {
            j += 1;
        }
        let end = chars.get(j).map_or(paragraph.len(), |&(b, _)| b);
        spans.push(start..end);
        start = end;
        i = j;
    }
    if start < paragraph.len() {
        spans.push(start..paragraph.len());
    }
    spans
}

/// Whether the period at byte `dot` closes a token like `J.` or `e.g.`.
fn is_abbreviation(text: &str, dot: usize) -> bool {
    let token_start = text[..dot]
        .rfind(char::is_whitespace)
        .map_or(0, |i| i + text[i..].chars().next().map_or(1, char::len_utf8));
    let token = text[token_start..=dot].trim_start_matches(['(', '[', '"', '\'']);
    let mut chars = token.chars();
    loop {
        match (chars.next(), chars.next()) {
            (Some(l), Some('.')) if l.is_alphabetic() => {}
            (None, _) => return !token.is_empty(),
            _ => return false,
        }
    }
}

/// Trimmed text of a sentence span.
pub fn sentence_text<'a>(paragraph: &'a str, span: &Range<usize>) -> &'a str {
    paragraph[span.clone()].trim()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentences(text: &str) -> Vec<&str> {
        segment_sentences(text)
            .iter()
            .map(|s| sentence_text(text, s))
            .collect()
    }

    #[test]
    fn three_sentences_with_url() {
        assert_eq!(
            sentences("We release code. See http://a.b/c. Results follow."),
            ["We release code.", "See http://a.b/c.", "Results follow."]
        );
    }

    #[test]
    fn period_inside_url_is_not_a_boundary() {
        assert_eq!(
            sentences("Data at http://x.org/v1.2 is public."),
            ["Data at http://x.org/v1.2 is public."]
        );
    }

    #[test]
    fn empty() {
        assert!(segment_sentences("").is_empty());
    }

    #[test]
    fn abbreviations() {
        assert_eq!(
            sentences("Written by J. Smith, e.g. here. Next one? Yes! (Done.) End"),
            ["Written by J. Smith, e.g. here.", "Next one?", "Yes!", "(Done.)", "End"]
        );
    }

    #[test]
    fn spans_tile() {
        let text = "A bc.  C d?\tE.";
        let spans = segment_sentences(text);
        assert_eq!(spans, vec![0..7, 7..12, 12..14]);
    }
}

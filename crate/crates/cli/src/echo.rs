//! A protocol-conformant classifier that answers with the lexicon classifier.
//! Used to check the external classifier path end to end.

use std::collections::HashSet;
use std::io::{self, BufRead, Write};

use linkmine::classify::classify_lexicon;
use linkmine::normalize_url;
use serde::{Deserialize, Serialize};

#[derive(Deserialize)]
struct Request {
    id: String,
    url: String,
    context: String,
}

#[derive(Serialize)]
struct Response<'a> {
    id: &'a str,
    label: &'a str,
    confidence: f64,
}

/// The token in `context` that normalizes to `canonical`.
pub fn raw_in_context<'a>(context: &'a str, canonical: &str) -> Option<&'a str> {
    let lower = context.to_ascii_lowercase();
    let starts = (0..context.len()).filter(|&i| {
        context.is_char_boundary(i)
            && ["http://", "https://", "ftp://", "www."]
                .iter()
                .any(|p| lower[i..].starts_with(p))
    });
    for start in starts {
        let end = context[start..]
            .find(char::is_whitespace)
            .map_or(context.len(), |e| start + e);
        let token = &context[start..end];
        if normalize_url(token).is_ok_and(|u| u.canonical == canonical) {
            return Some(token);
        }
    }
    None
}

/// Serves requests from `input` until end of stream. Ids in `garble` get an
/// invalid label instead of an answer.
pub fn serve(input: impl BufRead, mut output: impl Write, garble: &HashSet<String>) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Ok(req) = serde_json::from_str::<Request>(&line) else {
            continue;
        };
        let domain = normalize_url(&req.url).map(|u| u.domain).unwrap_or_default();
        let raw = raw_in_context(&req.context, &req.url).unwrap_or(&req.url);
        let (class, confidence) = classify_lexicon(&req.context, Some(raw), &domain);
        let label = if garble.contains(&req.id) { "not-a-class" } else { class.label() };
        serde_json::to_writer(
            &mut output,
            &Response {
                id: &req.id,
                label,
                confidence,
            },
        )?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_decorated_token() {
        let ctx = "Annotators used the brat tool (http://brat.example.org/).";
        assert_eq!(
            raw_in_context(ctx, "http://brat.example.org"),
            Some("http://brat.example.org/).")
        );
        assert_eq!(raw_in_context(ctx, "http://other.org"), None);
    }

    #[test]
    fn answers_each_request() {
        let input = concat!(
            r#"{"id":"0","url":"http://x.org/a","context":"we release our code at http://x.org/a","section":"S"}"#,
            "\n",
            "garbage\n",
            r#"{"id":"1","url":"http://x.org/b","context":"the data at http://x.org/b","section":"S"}"#,
            "\n"
        );
        let mut out = Vec::new();
        let garble: HashSet<String> = ["1".to_string()].into();
        serve(input.as_bytes(), &mut out, &garble).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], r#"{"id":"0","label":"methods","confidence":0.9}"#);
        assert!(lines[1].contains("not-a-class"));
    }
}

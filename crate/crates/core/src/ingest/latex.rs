//! A small LaTeX lexer that turns a flattened paper source into sectioned
//! plain-text paragraphs.
//!
//! This is not a TeX engine. It understands what URL mining needs: comments,
//! headings, paragraphs, footnotes, `\url`/`\href`, math and verbatim blocks.
//! Every other control word is dropped and its braced arguments are read as
//! ordinary text.

use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Heading of the pseudo-section holding everything before the first heading.
pub const FRONT_SECTION: &str = "FRONT";
/// Token standing in for a display-math block.
pub const MATH_PLACEHOLDER: &str = "[MATH]";
pub const CITE_PLACEHOLDER: &str = "[CITE]";
pub const REF_PLACEHOLDER: &str = "[REF]";

/// Where an output character came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Copied unchanged from this source byte offset.
    Source(usize),
    /// Produced by the lexer (separator, placeholder, escape) for the
    /// construct starting at this source byte offset.
    Synthetic(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paragraph {
    pub text: String,
    /// Byte ranges of `text` produced by `\footnote{...}` content.
    pub footnote_spans: Vec<Range<usize>>,
    /// Byte ranges of `text` holding a `\url` argument or `\href` target.
    pub url_spans: Vec<Range<usize>>,
    /// One entry per `char` of `text`.
    #[serde(skip)]
    pub origins: Vec<Origin>,
}

impl Paragraph {
    pub fn in_footnote(&self, span: &Range<usize>) -> bool {
        self.footnote_spans
            .iter()
            .any(|f| f.start <= span.start && span.end <= f.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    pub paragraphs: Vec<Paragraph>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedDocument {
    pub paper_id: String,
    pub sections: Vec<Section>,
    pub paragraph_count: usize,
    /// Structural problems found while parsing (unbalanced braces, ...).
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ParsedDocument {
    /// Paragraphs in document order with their section heading and global index.
    pub fn paragraphs(&self) -> impl Iterator<Item = (usize, &str, &Paragraph)> {
        self.sections
            .iter()
            .flat_map(|s| s.paragraphs.iter().map(move |p| (s.heading.as_str(), p)))
            .enumerate()
            .map(|(i, (h, p))| (i, h, p))
    }
}

const HEADING_COMMANDS: &[&str] = &["chapter", "section", "subsection", "subsubsection"];
const FOOTNOTE_COMMANDS: &[&str] = &["footnote", "footnotetext"];
const CITE_COMMANDS: &[&str] = &["cite", "citep", "citet", "citealp", "citeauthor", "citeyear", "nocite"];
const REF_COMMANDS: &[&str] = &["ref", "eqref", "autoref", "cref", "Cref", "pageref", "nameref"];
/// Commands whose optional and braced arguments carry no prose.
const SKIP_ARG_COMMANDS: &[&str] = &[
    "label", "includegraphics", "usepackage", "documentclass", "bibliographystyle",
    "bibliography", "input", "include", "vspace", "hspace", "newcommand", "renewcommand",
    "providecommand", "newenvironment", "renewenvironment", "setlength", "addtolength",
    "setcounter", "pagestyle", "thispagestyle", "hypersetup", "graphicspath", "urlstyle",
    "definecolor", "color", "textcolor", "newtheorem", "DeclareMathOperator", "linespread",
    "fontsize", "addbibresource", "captionsetup", "geometry",
];
const DISPLAY_MATH_ENVS: &[&str] = &[
    "equation", "equation*", "align", "align*", "gather", "gather*", "multline",
    "multline*", "eqnarray", "eqnarray*", "displaymath", "flalign", "flalign*", "alignat",
    "alignat*",
];
const VERBATIM_ENVS: &[&str] = &["verbatim", "verbatim*", "lstlisting", "minted", "Verbatim"];
/// Environments followed by a column specification argument.
const TABULAR_ENVS: &[&str] = &["tabular", "tabular*", "tabularx", "array", "longtable"];

#[derive(Default)]
struct Builder {
    text: String,
    origins: Vec<Origin>,
    footnote_spans: Vec<Range<usize>>,
    url_spans: Vec<Range<usize>>,
    pending_space: Option<Origin>,
    /// Open footnotes: start offset of their first content character.
    open_footnotes: Vec<Option<usize>>,
}

impl Builder {
    fn space(&mut self, origin: Origin) {
        if !self.text.is_empty() && self.pending_space.is_none() {
            self.pending_space = Some(origin);
        }
    }

    /// Pushes `c`, flushing a pending separator first. Returns the byte
    /// offset at which `c` was written.
    fn push(&mut self, c: char, origin: Origin) -> usize {
        if c.is_whitespace() {
            self.space(origin);
            return self.text.len();
        }
        if let Some(sp) = self.pending_space.take() {
            self.text.push(' ');
            self.origins.push(sp);
        }
        let at = self.text.len();
        for f in self.open_footnotes.iter_mut() {
            if f.is_none() {
                *f = Some(at);
            }
        }
        self.text.push(c);
        self.origins.push(origin);
        at
    }

    fn push_str_synthetic(&mut self, s: &str, at: usize) {
        for c in s.chars() {
            self.push(c, Origin::Synthetic(at));
        }
    }

    fn take_paragraph(&mut self) -> Option<Paragraph> {
        let b = std::mem::take(self);
        if b.text.is_empty() {
            return None;
        }
        Some(Paragraph {
            text: b.text,
            footnote_spans: b.footnote_spans,
            url_spans: b.url_spans,
            origins: b.origins,
        })
    }
}

struct Lexer {
    chars: Vec<char>,
    offsets: Vec<usize>,
    src_len: usize,
    pos: usize,
    /// Number of enclosing contexts in which paragraph breaks are not allowed.
    inline_depth: usize,
    stop: bool,
    warnings: Vec<String>,
    sections: Vec<Section>,
    out: Vec<Builder>,
}

/// Parses a flattened LaTeX source. Never fails; structural problems are
/// reported in [`ParsedDocument::warnings`].
pub fn parse_latex(source: &str, paper_id: &str) -> ParsedDocument {
    let (chars, offsets): (Vec<char>, Vec<usize>) =
        source.char_indices().map(|(i, c)| (c, i)).unzip();
    let mut lx = Lexer {
        chars,
        offsets,
        src_len: source.len(),
        pos: 0,
        inline_depth: 0,
        stop: false,
        warnings: Vec::new(),
        sections: vec![Section {
            heading: FRONT_SECTION.to_string(),
            paragraphs: Vec::new(),
        }],
        out: vec![Builder::default()],
    };
    if let Some(start) = find_document_body(source) {
        lx.pos = lx.offsets.partition_point(|&o| o < start);
    }
    lx.run(false);
    lx.finish_paragraph();
    let paragraph_count = lx.sections.iter().map(|s| s.paragraphs.len()).sum();
    ParsedDocument {
        paper_id: paper_id.to_string(),
        sections: lx.sections,
        paragraph_count,
        warnings: lx.warnings,
    }
}

/// Byte offset just past an uncommented `\begin{document}`.
fn find_document_body(source: &str) -> Option<usize> {
    const NEEDLE: &str = "\\begin{document}";
    let mut line_start = 0;
    for line in source.split_inclusive('\n') {
        let code_end = comment_start(line).unwrap_or(line.len());
        if let Some(i) = line[..code_end].find(NEEDLE) {
            return Some(line_start + i + NEEDLE.len());
        }
        line_start += line.len();
    }
    None
}

/// Byte offset of the first unescaped `%` in a line.
fn comment_start(line: &str) -> Option<usize> {
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'%' => return Some(i),
            _ => i += 1,
        }
    }
    None
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn offset(&self, pos: usize) -> usize {
        self.offsets.get(pos).copied().unwrap_or(self.src_len)
    }

    fn out(&mut self) -> &mut Builder {
        self.out.last_mut().expect("builder stack never empty")
    }

    fn finish_paragraph(&mut self) {
        if self.out.len() != 1 {
            return;
        }
        if let Some(p) = self.out[0].take_paragraph() {
            self.sections
                .last_mut()
                .expect("FRONT section always present")
                .paragraphs
                .push(p);
        }
    }

    /// Main loop. With `in_group` set, returns after the matching `}`.
    fn run(&mut self, in_group: bool) {
        while let Some(c) = self.peek() {
            if self.stop {
                return;
            }
            let at = self.offset(self.pos);
            match c {
                '%' => self.skip_comment(),
                '\\' => self.control_sequence(),
                '{' => {
                    self.pos += 1;
                    self.run(true);
                }
                '}' => {
                    self.pos += 1;
                    if in_group {
                        return;
                    }
                    self.warnings
                        .push(format!("unmatched closing brace at byte {at}"));
                }
                '$' => self.dollar(),
                '~' | '&' => {
                    self.pos += 1;
                    self.out().space(Origin::Synthetic(at));
                }
                c if c.is_whitespace() => self.whitespace(),
                c => {
                    self.pos += 1;
                    self.out().push(c, Origin::Source(at));
                }
            }
        }
        if in_group && !self.stop {
            self.warnings
                .push("unclosed brace group at end of input".to_string());
        }
    }

    fn skip_comment(&mut self) {
        while let Some(c) = self.peek() {
            self.pos += 1;
            if c == '\n' {
                break;
            }
        }
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn whitespace(&mut self) {
        let at = self.offset(self.pos);
        let mut newlines = 0;
        loop {
            match self.peek() {
                Some('\n') => {
                    newlines += 1;
                    self.pos += 1;
                }
                Some(c) if c.is_whitespace() => self.pos += 1,
                Some('%') => self.skip_comment(),
                _ => break,
            }
        }
        if newlines >= 2 && self.inline_depth == 0 && self.out.len() == 1 {
            self.finish_paragraph();
        } else {
            self.out().space(Origin::Synthetic(at));
        }
    }

    fn dollar(&mut self) {
        let at = self.offset(self.pos);
        if self.peek_at(1) == Some('$') {
            self.pos += 2;
            self.skip_until("$$");
            self.math_placeholder(at);
        } else {
            // Inline math: the delimiter disappears, the content is read as text.
            self.pos += 1;
        }
    }

    fn math_placeholder(&mut self, at: usize) {
        let out = self.out();
        out.space(Origin::Synthetic(at));
        out.push_str_synthetic(MATH_PLACEHOLDER, at);
        out.space(Origin::Synthetic(at));
    }

    /// Advances past the next occurrence of `end`, or to end of input.
    fn skip_until(&mut self, end: &str) -> Range<usize> {
        let start = self.pos;
        let end_chars: Vec<char> = end.chars().collect();
        while self.pos < self.chars.len() {
            if self.chars[self.pos..].starts_with(&end_chars) {
                let r = start..self.pos;
                self.pos += end_chars.len();
                return r;
            }
            self.pos += 1;
        }
        self.warnings
            .push(format!("unterminated block, expected `{end}`"));
        start..self.pos
    }

    fn read_letters(&mut self) -> String {
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphabetic() || c == '@' {
                name.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        name
    }

    fn skip_horizontal_space(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    /// Skips blanks and at most one newline, the way TeX does between a
    /// command and its arguments.
    fn skip_arg_space(&mut self) {
        self.skip_horizontal_space();
        if self.peek() == Some('\n') {
            let save = self.pos;
            self.pos += 1;
            self.skip_horizontal_space();
            if self.peek() == Some('\n') {
                self.pos = save;
            }
        }
    }

    /// Reads a raw balanced `{...}` argument without interpreting it.
    /// Returns char positions of the content.
    fn raw_group(&mut self) -> Option<Range<usize>> {
        self.skip_arg_space();
        if self.peek() != Some('{') {
            return None;
        }
        self.pos += 1;
        let start = self.pos;
        let mut depth = 1usize;
        while let Some(c) = self.peek() {
            match c {
                '\\' => self.pos += 1,
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        let r = start..self.pos;
                        self.pos += 1;
                        return Some(r);
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
        self.pos = self.pos.min(self.chars.len());
        self.warnings
            .push("unclosed argument at end of input".to_string());
        Some(start..self.chars.len())
    }

    fn skip_optional(&mut self) -> bool {
        let save = self.pos;
        self.skip_arg_space();
        if self.peek() != Some('[') {
            self.pos = save;
            return false;
        }
        let mut depth = 0usize;
        while let Some(c) = self.peek() {
            self.pos += 1;
            match c {
                '[' => depth += 1,
                ']' => {
                    depth -= 1;
                    if depth == 0 {
                        return true;
                    }
                }
                '{' => {
                    self.pos -= 1;
                    self.raw_group();
                }
                _ => {}
            }
        }
        true
    }

    fn skip_all_args(&mut self) {
        loop {
            if self.skip_optional() {
                continue;
            }
            let save = self.pos;
            self.skip_horizontal_space();
            if self.peek() == Some('{') {
                self.raw_group();
            } else {
                self.pos = save;
                break;
            }
        }
    }

    /// Parses a braced argument as text into a fresh builder and returns it.
    fn text_group_into_new(&mut self) -> Builder {
        self.out.push(Builder::default());
        self.inline_depth += 1;
        self.skip_arg_space();
        if self.peek() == Some('{') {
            self.pos += 1;
            self.run(true);
        }
        self.inline_depth -= 1;
        self.out.pop().expect("pushed above")
    }

    fn control_sequence(&mut self) {
        let start = self.pos;
        let at = self.offset(start);
        self.pos += 1;
        let Some(next) = self.peek() else {
            return;
        };
        if !next.is_ascii_alphabetic() && next != '@' {
            self.pos += 1;
            self.control_symbol(next, at);
            return;
        }
        let mut name = self.read_letters();
        if self.peek() == Some('*') {
            self.pos += 1;
            name.push('*');
        }
        let base = name.trim_end_matches('*');
        self.skip_horizontal_space();

        if HEADING_COMMANDS.contains(&base) {
            self.skip_optional();
            let heading = self.text_group_into_new();
            self.finish_paragraph();
            self.sections.push(Section {
                heading: heading.text,
                paragraphs: Vec::new(),
            });
        } else if FOOTNOTE_COMMANDS.contains(&base) {
            self.skip_optional();
            self.footnote(at);
        } else if base == "url" {
            if let Some(r) = self.raw_group() {
                self.emit_url(r, false, true);
            }
        } else if base == "href" {
            self.href(at);
        } else if CITE_COMMANDS.contains(&base) {
            self.skip_all_args();
            let out = self.out();
            out.space(Origin::Synthetic(at));
            out.push_str_synthetic(CITE_PLACEHOLDER, at);
        } else if REF_COMMANDS.contains(&base) {
            self.skip_all_args();
            self.out().push_str_synthetic(REF_PLACEHOLDER, at);
        } else if SKIP_ARG_COMMANDS.contains(&base) {
            self.skip_all_args();
        } else if base == "def" {
            // \def\name#1#2{body}
            while let Some(c) = self.peek() {
                if c == '{' {
                    break;
                }
                self.pos += 1;
            }
            self.raw_group();
        } else if base == "verb" {
            self.verb(at);
        } else if base == "begin" {
            self.begin_environment(at);
        } else if base == "end" {
            if let Some(r) = self.raw_group() {
                let env: String = self.chars[r].iter().collect();
                if env.trim() == "document" {
                    self.stop = true;
                }
            }
        } else if base == "par" {
            if self.inline_depth == 0 && self.out.len() == 1 {
                self.finish_paragraph();
            }
        } else if base == "item" {
            self.out().space(Origin::Synthetic(at));
        }
        // Anything else: the command word vanishes; arguments read as text.
    }

    fn control_symbol(&mut self, c: char, at: usize) {
        match c {
            '%' | '&' | '_' | '#' | '$' | '{' | '}' => {
                self.out().push(c, Origin::Synthetic(at));
            }
            '\\' => {
                if self.peek() == Some('*') {
                    self.pos += 1;
                }
                self.skip_optional();
                self.out().space(Origin::Synthetic(at));
            }
            '[' => {
                self.skip_until("\\]");
                self.math_placeholder(at);
            }
            ',' | ';' | ':' | ' ' | '\n' | '\t' | 'q' => self.out().space(Origin::Synthetic(at)),
            // Accents, discretionary hyphens, italic corrections, inline math
            // delimiters: nothing to emit.
            _ => {}
        }
    }

    fn footnote(&mut self, at: usize) {
        self.skip_arg_space();
        if self.peek() != Some('{') {
            return;
        }
        self.pos += 1;
        self.out().space(Origin::Synthetic(at));
        self.out().open_footnotes.push(None);
        self.inline_depth += 1;
        self.run(true);
        self.inline_depth -= 1;
        let out = self.out();
        if let Some(Some(start)) = out.open_footnotes.pop() {
            let end = out.text.len();
            out.footnote_spans.push(start..end);
        }
        out.space(Origin::Synthetic(at));
    }

    /// Emits a URL argument verbatim (whitespace inside it is dropped).
    /// `unescape` resolves `\#`-style escapes, as `\href` does.
    fn emit_url(&mut self, r: Range<usize>, unescape: bool, separate: bool) {
        let mut chars: Vec<(char, Origin)> = Vec::new();
        let mut i = r.start;
        while i < r.end {
            let c = self.chars[i];
            let at = self.offsets[i];
            if unescape && c == '\\' && i + 1 < r.end && "#%_&~$".contains(self.chars[i + 1]) {
                chars.push((self.chars[i + 1], Origin::Synthetic(at)));
                i += 2;
                continue;
            }
            if !c.is_whitespace() {
                chars.push((c, Origin::Source(at)));
            }
            i += 1;
        }
        if chars.is_empty() {
            return;
        }
        let at = self.offset(r.start);
        let out = self.out();
        if separate && out.text.ends_with(char::is_alphanumeric) {
            out.space(Origin::Synthetic(at));
        }
        let mut start = None;
        for (c, o) in chars {
            let pos = out.push(c, o);
            start.get_or_insert(pos);
        }
        let start = start.expect("non-empty");
        let end = out.text.len();
        out.url_spans.push(start..end);
    }

    fn href(&mut self, at: usize) {
        let Some(target) = self.raw_group() else {
            return;
        };
        let label = self.text_group_into_new();
        let label_text = label.text.trim();
        let label_is_url = label_text.contains("://") || label_text.starts_with("www.");
        if !label_text.is_empty() && !label_is_url {
            self.append_builder(label);
            let out = self.out();
            out.push_str_synthetic(" (", at);
            self.emit_url(target, true, false);
            self.out().push(')', Origin::Synthetic(at));
        } else {
            self.emit_url(target, true, true);
        }
    }

    /// Appends text produced in a nested builder to the current one.
    fn append_builder(&mut self, inner: Builder) {
        if inner.text.is_empty() {
            return;
        }
        let out = self.out();
        if let Some(sp) = out.pending_space.take() {
            out.text.push(' ');
            out.origins.push(sp);
        }
        let base = out.text.len();
        for f in out.open_footnotes.iter_mut() {
            if f.is_none() {
                *f = Some(base);
            }
        }
        out.text.push_str(&inner.text);
        out.origins.extend(inner.origins);
        out.footnote_spans
            .extend(inner.footnote_spans.into_iter().map(|r| r.start + base..r.end + base));
        out.url_spans
            .extend(inner.url_spans.into_iter().map(|r| r.start + base..r.end + base));
        if inner.pending_space.is_some() {
            out.pending_space = inner.pending_space;
        }
    }

    fn verb(&mut self, at: usize) {
        let Some(delim) = self.peek() else {
            return;
        };
        self.pos += 1;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == delim || c == '\n' {
                break;
            }
            self.pos += 1;
        }
        let end = self.pos;
        if self.peek() == Some(delim) {
            self.pos += 1;
        }
        self.emit_raw_text(start..end, at);
    }

    fn emit_raw_text(&mut self, r: Range<usize>, at: usize) {
        for i in r {
            let c = self.chars[i];
            let o = self.offsets[i];
            if c.is_whitespace() {
                self.out().space(Origin::Synthetic(o));
            } else {
                self.out().push(c, Origin::Source(o));
            }
        }
        self.out().space(Origin::Synthetic(at));
    }

    fn begin_environment(&mut self, at: usize) {
        let Some(r) = self.raw_group() else {
            return;
        };
        let env: String = self.chars[r].iter().collect::<String>().trim().to_string();
        if DISPLAY_MATH_ENVS.contains(&env.as_str()) {
            self.skip_until(&format!("\\end{{{env}}}"));
            self.math_placeholder(at);
        } else if VERBATIM_ENVS.contains(&env.as_str()) {
            self.skip_optional();
            if env == "minted" {
                self.raw_group();
            }
            let body = self.skip_until(&format!("\\end{{{env}}}"));
            self.emit_raw_text(body, at);
        } else {
            self.skip_optional();
            if TABULAR_ENVS.contains(&env.as_str()) {
                if env == "tabularx" || env == "tabular*" {
                    self.raw_group();
                }
                self.raw_group();
            }
            if env != "document" {
                self.out().space(Origin::Synthetic(at));
            }
        }
    }
}

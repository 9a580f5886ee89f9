//! URL normalization.
//!
//! Rules, applied in order:
//!
//! 1. trailing `.,;:!?'"` are stripped, as are closing `)`, `]`, `}` that have
//!    no matching opener in the URL body (repeated until nothing changes);
//! 2. the scheme (`http`, `https`, `ftp`, or none for `www.`-style input) and
//!    the host are lowercased; userinfo is dropped;
//! 3. default ports are removed, the fragment is dropped, the query is kept;
//! 4. trailing `/` are removed from the path;
//! 5. path case and percent-encoding are left untouched.
//!
//! The canonical form is a fixpoint: normalizing it again returns it unchanged.

use std::fmt;
use std::net::{Ipv4Addr, Ipv6Addr};

use serde::{Deserialize, Serialize};

use super::domain::registrable_domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Http,
    Https,
    Ftp,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Http => "http",
            Scheme::Https => "https",
            Scheme::Ftp => "ftp",
        }
    }

    fn default_port(self) -> u16 {
        match self {
            Scheme::Http => 80,
            Scheme::Https => 443,
            Scheme::Ftp => 21,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalizedUrl {
    pub scheme: Option<Scheme>,
    pub host: String,
    pub port: Option<u16>,
    pub path: String,
    pub query: Option<String>,
    pub canonical: String,
    /// Registrable domain (eTLD+1) of `host`.
    pub domain: String,
}

impl NormalizedUrl {
    /// Whether the URL can be checked over HTTP(S).
    pub fn is_http_probeable(&self) -> bool {
        !matches!(self.scheme, Some(Scheme::Ftp))
    }

    /// The URL with a specific scheme, for probing scheme-less URLs.
    pub fn with_scheme(&self, scheme: Scheme) -> String {
        let mut s = format!("{scheme}://{}", self.host);
        if let Some(port) = self.port {
            s.push_str(&format!(":{port}"));
        }
        s.push_str(&self.path);
        if let Some(q) = &self.query {
            s.push('?');
            s.push_str(q);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("empty URL")]
    Empty,
    #[error("mailto links are not collected")]
    Mailto,
    #[error("unsupported scheme `{0}`")]
    UnsupportedScheme(String),
    #[error("no plausible host")]
    NoHost,
    #[error("invalid port")]
    BadPort,
}

const TRAILING_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', '\'', '"'];

pub fn normalize_url(raw: &str) -> Result<NormalizedUrl, Rejection> {
    let mut url = normalize_once(raw)?;
    // Stripping a trailing slash can expose punctuation that rule 1 would
    // remove; iterate to the fixpoint.
    for _ in 0..8 {
        let again = normalize_once(&url.canonical)?;
        if again.canonical == url.canonical {
            return Ok(url);
        }
        url = again;
    }
    Ok(url)
}

fn strip_trailing(s: &str) -> &str {
    let mut s = s;
    loop {
        let Some(last) = s.chars().last() else {
            return s;
        };
        let strip = if TRAILING_PUNCT.contains(&last) {
            true
        } else if let Some(open) = match last {
            ')' => Some('('),
            ']' => Some('['),
            '}' => Some('{'),
            _ => None,
        } {
            s.matches(open).count() < s.matches(last).count()
        } else {
            false
        };
        if !strip {
            return s;
        }
        s = &s[..s.len() - last.len_utf8()];
    }
}

fn normalize_once(raw: &str) -> Result<NormalizedUrl, Rejection> {
    let s = strip_trailing(raw.trim());
    if s.is_empty() {
        return Err(Rejection::Empty);
    }
    if s.len() >= 7 && s[..7].eq_ignore_ascii_case("mailto:") {
        return Err(Rejection::Mailto);
    }

    let (scheme, rest) = match s.find("://") {
        Some(i) if is_scheme_token(&s[..i]) => {
            let scheme = match s[..i].to_ascii_lowercase().as_str() {
                "http" => Scheme::Http,
                "https" => Scheme::Https,
                "ftp" => Scheme::Ftp,
                other => return Err(Rejection::UnsupportedScheme(other.to_string())),
            };
            (Some(scheme), &s[i + 3..])
        }
        _ => (None, s.strip_prefix("//").unwrap_or(s)),
    };

    let rest = rest.split('#').next().unwrap_or_default();
    let auth_end = rest.find(['/', '?']).unwrap_or(rest.len());
    let (authority, tail) = rest.split_at(auth_end);
    let (path, query) = match tail.split_once('?') {
        Some((p, q)) => (p, Some(q)),
        None => (tail, None),
    };

    let authority = authority.rsplit('@').next().unwrap_or_default();
    let (host, port) = split_host_port(authority)?;
    let host = host.trim_end_matches('.').to_lowercase();
    if !plausible_host(&host) {
        return Err(Rejection::NoHost);
    }
    let port = match (port, scheme) {
        (Some(p), Some(sch)) if p == sch.default_port() => None,
        (p, _) => p,
    };
    let path = path.trim_end_matches('/').to_string();
    let query = query.filter(|q| !q.is_empty()).map(str::to_string);

    let mut canonical = String::new();
    if let Some(sch) = scheme {
        canonical.push_str(sch.as_str());
        canonical.push_str("://");
    }
    canonical.push_str(&host);
    if let Some(p) = port {
        canonical.push_str(&format!(":{p}"));
    }
    canonical.push_str(&path);
    if let Some(q) = &query {
        canonical.push('?');
        canonical.push_str(q);
    }
    let domain = registrable_domain(&host);
    Ok(NormalizedUrl {
        scheme,
        host,
        port,
        path,
        query,
        canonical,
        domain,
    })
}

fn is_scheme_token(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || "+.-".contains(c))
}

fn split_host_port(authority: &str) -> Result<(&str, Option<u16>), Rejection> {
    if authority.starts_with('[') {
        let close = authority.find(']').ok_or(Rejection::NoHost)?;
        let host = &authority[..=close];
        let port = match &authority[close + 1..] {
            "" | ":" => None,
            p => Some(parse_port(p.strip_prefix(':').ok_or(Rejection::BadPort)?)?),
        };
        return Ok((host, port));
    }
    match authority.rsplit_once(':') {
        Some((h, "")) => Ok((h, None)),
        Some((h, p)) => Ok((h, Some(parse_port(p)?))),
        None => Ok((authority, None)),
    }
}

fn parse_port(p: &str) -> Result<u16, Rejection> {
    if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Rejection::BadPort);
    }
    p.parse().map_err(|_| Rejection::BadPort)
}

pub(crate) fn is_ip_literal(host: &str) -> bool {
    if let Some(inner) = host.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
        return inner.parse::<Ipv6Addr>().is_ok();
    }
    host.parse::<Ipv4Addr>().is_ok()
}

fn plausible_host(host: &str) -> bool {
    if host.is_empty() {
        return false;
    }
    if is_ip_literal(host) {
        return true;
    }
    if !host.contains('.') {
        return false;
    }
    let labels: Vec<&str> = host.split('.').collect();
    let label_ok = |l: &&str| {
        !l.is_empty()
            && !l.starts_with('-')
            && !l.ends_with('-')
            && l.chars().all(|c| c.is_alphanumeric() || c == '-' || c == '_')
    };
    if !labels.iter().all(label_ok) {
        return false;
    }
    let tld = labels.last().expect("split yields at least one label");
    tld.chars().any(char::is_alphabetic) && !tld.contains('_')
}

use std::collections::HashMap;
use std::error::Error as StdError;
use std::net::SocketAddr;
use std::path::Path;
use std::time::Duration;

use serde::Deserialize;

use super::{ProbeConfig, TransportErrorKind};
use crate::error::{Error, Result};

/// Outcome of a single request, redirects not followed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub location: Option<String>,
    pub retry_after: Option<Duration>,
}

impl HttpResponse {
    pub fn status(status: u16) -> Self {
        HttpResponse {
            status,
            location: None,
            retry_after: None,
        }
    }

    pub fn redirect(status: u16, location: impl Into<String>) -> Self {
        HttpResponse {
            status,
            location: Some(location.into()),
            retry_after: None,
        }
    }
}

/// Issues one GET request. Implementations must not follow redirects.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportErrorKind>;
}

impl<F> Transport for F
where
    F: Fn(&str) -> Result<HttpResponse, TransportErrorKind> + Send + Sync,
{
    fn get(&self, url: &str) -> Result<HttpResponse, TransportErrorKind> {
        self(url)
    }
}

/// Real network transport.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(cfg: &ProbeConfig) -> Result<Self> {
        Self::with_overrides(cfg, &[])
    }

    /// Like [`HttpTransport::new`], resolving the given host names to fixed addresses.
    pub fn with_overrides(cfg: &ProbeConfig, overrides: &[(String, SocketAddr)]) -> Result<Self> {
        let mut builder = reqwest::blocking::Client::builder()
            .redirect(reqwest::redirect::Policy::none())
            .user_agent(cfg.user_agent.clone())
            .connect_timeout(cfg.timeout)
            // Connect budget plus read budget.
            .timeout(cfg.timeout * 2)
            .pool_max_idle_per_host(0);
        for (host, addr) in overrides {
            builder = builder.resolve(host, *addr);
        }
        let client = builder
            .build()
            .map_err(|e| Error::Invalid(format!("cannot build HTTP client: {e}")))?;
        Ok(HttpTransport { client })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportErrorKind> {
        let resp = self.client.get(url).send().map_err(|e| error_kind(&e))?;
        let header = |name| {
            resp.headers()
                .get(name)
                .and_then(|v| v.to_str().ok())
                .map(str::to_string)
        };
        let location = header(reqwest::header::LOCATION);
        let retry_after = header(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        // Dropping the response discards the body unread.
        Ok(HttpResponse {
            status: resp.status().as_u16(),
            location,
            retry_after,
        })
    }
}

fn error_kind(e: &reqwest::Error) -> TransportErrorKind {
    if e.is_timeout() {
        return if e.is_connect() {
            TransportErrorKind::ConnectTimeout
        } else {
            TransportErrorKind::ReadTimeout
        };
    }
    if chain_mentions_tls(e) {
        return TransportErrorKind::SslError;
    }
    TransportErrorKind::ConnectionError
}

fn chain_mentions_tls(e: &(dyn StdError + 'static)) -> bool {
    const MARKERS: [&str; 6] = ["tls", "ssl", "certificate", "handshake", "invalidcontenttype", "corrupt message"];
    let mut cur: Option<&(dyn StdError + 'static)> = Some(e);
    while let Some(err) = cur {
        let text = format!("{err:?} {err}").to_ascii_lowercase();
        if MARKERS.iter().any(|m| text.contains(m)) {
            return true;
        }
        cur = err.source();
    }
    false
}

/// One canned response for [`FixtureTransport`].
#[derive(Debug, Clone, Deserialize)]
pub struct FixtureResponse {
    pub url: String,
    #[serde(default)]
    pub status: Option<u16>,
    #[serde(default)]
    pub error: Option<TransportErrorKind>,
    #[serde(default)]
    pub location: Option<String>,
    #[serde(default)]
    pub retry_after: Option<u64>,
}

/// Offline transport answering from a table of canned responses.
///
/// URLs missing from the table fail with `ConnectionError`.
#[derive(Debug, Clone, Default)]
pub struct FixtureTransport {
    table: HashMap<String, FixtureResponse>,
}

impl FixtureTransport {
    pub fn new(entries: impl IntoIterator<Item = FixtureResponse>) -> Self {
        FixtureTransport {
            table: entries.into_iter().map(|r| (r.url.clone(), r)).collect(),
        }
    }

    /// Reads one JSON object per line: `{"url": ..., "status": 200}` or `{"url": ..., "error": "SSLError"}`.
    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self::new(crate::records::read_jsonl::<FixtureResponse>(path)?))
    }
}

impl Transport for FixtureTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, TransportErrorKind> {
        let Some(entry) = self.table.get(url) else {
            return Err(TransportErrorKind::ConnectionError);
        };
        if let Some(kind) = entry.error {
            return Err(kind);
        }
        Ok(HttpResponse {
            status: entry.status.unwrap_or(200),
            location: entry.location.clone(),
            retry_after: entry.retry_after.map(Duration::from_secs),
        })
    }
}

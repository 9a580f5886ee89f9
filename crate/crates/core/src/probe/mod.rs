//! HTTP liveness probing.
//!
//! A URL is alive when its final response (after redirects) has status 200,
//! and problematic otherwise, including every transport failure.

mod cache;
mod prober;
mod scheduler;
mod transport;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use cache::ProbeCache;
pub use prober::{probe, probe_with_limiter, status_rank};
pub use scheduler::{probe_all, DomainLimiter, ProbeRun};
pub use transport::{FixtureResponse, FixtureTransport, HttpResponse, HttpTransport, Transport};

use crate::extract::Scheme;

pub const DEFAULT_USER_AGENT: &str = concat!("linkmine/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub timeout: Duration,
    /// Minimum pause between the end of one request to a registrable domain
    /// and the start of the next.
    pub domain_wait: Duration,
    pub max_redirects: usize,
    pub max_concurrent_domains: usize,
    pub user_agent: String,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            timeout: Duration::from_secs(120),
            domain_wait: Duration::from_secs(6),
            max_redirects: 10,
            max_concurrent_domains: 16,
            user_agent: DEFAULT_USER_AGENT.to_string(),
        }
    }
}

/// Request failures that never produced a final HTTP status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransportErrorKind {
    ConnectionError,
    #[serde(rename = "SSLError")]
    SslError,
    ConnectTimeout,
    ReadTimeout,
    TooManyRedirects,
}

impl TransportErrorKind {
    pub const ALL: [TransportErrorKind; 5] = [
        TransportErrorKind::ConnectionError,
        TransportErrorKind::SslError,
        TransportErrorKind::ConnectTimeout,
        TransportErrorKind::ReadTimeout,
        TransportErrorKind::TooManyRedirects,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransportErrorKind::ConnectionError => "ConnectionError",
            TransportErrorKind::SslError => "SSLError",
            TransportErrorKind::ConnectTimeout => "ConnectTimeout",
            TransportErrorKind::ReadTimeout => "ReadTimeout",
            TransportErrorKind::TooManyRedirects => "TooManyRedirects",
        }
    }
}

/// Final HTTP status code or the transport failure that replaced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FinalStatus {
    Http(u16),
    Error(TransportErrorKind),
}

impl fmt::Display for FinalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FinalStatus::Http(code) => write!(f, "{code}"),
            FinalStatus::Error(kind) => f.write_str(kind.as_str()),
        }
    }
}

impl FromStr for FinalStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(code) = s.parse::<u16>() {
            return Ok(FinalStatus::Http(code));
        }
        TransportErrorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .map(FinalStatus::Error)
            .ok_or_else(|| format!("unknown probe status `{s}`"))
    }
}

impl TryFrom<String> for FinalStatus {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<FinalStatus> for String {
    fn from(s: FinalStatus) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Liveness {
    Alive,
    Problematic,
}

/// One line of the probe cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub canonical: String,
    pub scheme_used: Scheme,
    pub final_status: FinalStatus,
    pub redirect_hops: usize,
    pub alive: bool,
    pub probed_at: DateTime<Utc>,
}

impl ProbeResult {
    pub fn liveness(&self) -> Liveness {
        classify_liveness(self)
    }
}

/// Alive iff the final status is exactly 200.
pub fn classify_liveness(result: &ProbeResult) -> Liveness {
    if result.final_status == FinalStatus::Http(200) {
        Liveness::Alive
    } else {
        Liveness::Problematic
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(status: FinalStatus) -> ProbeResult {
        ProbeResult {
            canonical: "http://x.org".into(),
            scheme_used: Scheme::Http,
            final_status: status,
            redirect_hops: 0,
            alive: status == FinalStatus::Http(200),
            probed_at: DateTime::UNIX_EPOCH,
        }
    }

    #[test]
    fn only_200_is_alive() {
        assert_eq!(classify_liveness(&result(FinalStatus::Http(200))), Liveness::Alive);
        for code in [201, 204, 301, 403, 404, 429, 500, 503] {
            assert_eq!(
                classify_liveness(&result(FinalStatus::Http(code))),
                Liveness::Problematic
            );
        }
        for kind in TransportErrorKind::ALL {
            assert_eq!(
                classify_liveness(&result(FinalStatus::Error(kind))),
                Liveness::Problematic
            );
        }
    }

    #[test]
    fn status_strings() {
        assert_eq!("404".parse::<FinalStatus>().unwrap(), FinalStatus::Http(404));
        assert_eq!(
            "SSLError".parse::<FinalStatus>().unwrap(),
            FinalStatus::Error(TransportErrorKind::SslError)
        );
        assert!("Teapot".parse::<FinalStatus>().is_err());
        let json = serde_json::to_string(&result(FinalStatus::Error(TransportErrorKind::ReadTimeout))).unwrap();
        assert!(json.contains(r#""final_status":"ReadTimeout""#));
        let back: ProbeResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back.final_status, FinalStatus::Error(TransportErrorKind::ReadTimeout));
    }

    #[test]
    fn defaults() {
        let cfg = ProbeConfig::default();
        assert_eq!(cfg.timeout, Duration::from_secs(120));
        assert_eq!(cfg.domain_wait, Duration::from_secs(6));
        assert_eq!(cfg.max_redirects, 10);
    }
}

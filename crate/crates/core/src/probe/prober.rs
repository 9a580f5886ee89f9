use std::thread;

use chrono::Utc;

use super::scheduler::DomainLimiter;
use super::{FinalStatus, ProbeConfig, ProbeResult, Transport, TransportErrorKind};
use crate::extract::{registrable_domain, NormalizedUrl, Scheme};

/// Orders outcomes from worst (0) to best (5): transport error, other codes,
/// 5xx, 4xx, 3xx, 2xx.
pub fn status_rank(status: FinalStatus) -> u8 {
    match status {
        FinalStatus::Error(_) => 0,
        FinalStatus::Http(200..=299) => 5,
        FinalStatus::Http(300..=399) => 4,
        FinalStatus::Http(400..=499) => 3,
        FinalStatus::Http(500..=599) => 2,
        FinalStatus::Http(_) => 1,
    }
}

/// Probes one URL, spacing same-domain requests by `cfg.domain_wait`.
pub fn probe(url: &NormalizedUrl, cfg: &ProbeConfig, transport: &dyn Transport) -> ProbeResult {
    probe_with_limiter(url, cfg, transport, &DomainLimiter::new(cfg.domain_wait))
}

/// Like [`probe`], sharing politeness state with other probes through `limiter`.
pub fn probe_with_limiter(
    url: &NormalizedUrl,
    cfg: &ProbeConfig,
    transport: &dyn Transport,
    limiter: &DomainLimiter,
) -> ProbeResult {
    debug_assert!(url.is_http_probeable());
    let (scheme_used, final_status, redirect_hops) = match url.scheme {
        Some(scheme) => {
            let (status, hops) = follow(&url.with_scheme(scheme), cfg, transport, limiter);
            (scheme, status, hops)
        }
        None => {
            let https = follow(&url.with_scheme(Scheme::Https), cfg, transport, limiter);
            let http = follow(&url.with_scheme(Scheme::Http), cfg, transport, limiter);
            if status_rank(http.0) > status_rank(https.0) {
                (Scheme::Http, http.0, http.1)
            } else {
                (Scheme::Https, https.0, https.1)
            }
        }
    };
    ProbeResult {
        canonical: url.canonical.clone(),
        scheme_used,
        final_status,
        redirect_hops,
        alive: final_status == FinalStatus::Http(200),
        probed_at: Utc::now(),
    }
}

fn domain_of(url: &str) -> String {
    reqwest::Url::parse(url)
        .ok()
        .and_then(|u| u.host_str().map(|h| h.trim_matches(['[', ']']).to_ascii_lowercase()))
        .map(|h| registrable_domain(&h))
        .unwrap_or_default()
}

/// Requests `start` and follows redirects; returns the final status and hop count.
fn follow(
    start: &str,
    cfg: &ProbeConfig,
    transport: &dyn Transport,
    limiter: &DomainLimiter,
) -> (FinalStatus, usize) {
    let mut current = start.to_string();
    let mut hops = 0;
    loop {
        let resp = match request(&current, cfg, transport, limiter) {
            Ok(resp) => resp,
            Err(kind) => return (FinalStatus::Error(kind), hops),
        };
        let status = FinalStatus::Http(resp.status);
        if !(300..=399).contains(&resp.status) {
            return (status, hops);
        }
        let next = resp.location.as_deref().and_then(|loc| {
            reqwest::Url::parse(&current)
                .ok()?
                .join(loc.trim())
                .ok()
                .filter(|u| matches!(u.scheme(), "http" | "https"))
        });
        let Some(next) = next else {
            return (status, hops);
        };
        if hops == cfg.max_redirects {
            return (FinalStatus::Error(TransportErrorKind::TooManyRedirects), hops);
        }
        hops += 1;
        current = next.into();
    }
}

/// One request, retried once after a 429 that carries Retry-After.
fn request(
    url: &str,
    cfg: &ProbeConfig,
    transport: &dyn Transport,
    limiter: &DomainLimiter,
) -> Result<super::HttpResponse, TransportErrorKind> {
    let domain = domain_of(url);
    let first = {
        let _permit = limiter.acquire(&domain);
        transport.get(url)
    };
    match &first {
        Ok(resp) if resp.status == 429 => {
            let Some(delay) = resp.retry_after else {
                return first;
            };
            thread::sleep(delay.min(cfg.timeout));
            let _permit = limiter.acquire(&domain);
            transport.get(url)
        }
        _ => first,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;
    use std::time::Duration;

    use super::*;
    use crate::extract::normalize_url;
    use crate::probe::HttpResponse;

    fn cfg() -> ProbeConfig {
        ProbeConfig {
            domain_wait: Duration::ZERO,
            ..ProbeConfig::default()
        }
    }

    fn url(s: &str) -> NormalizedUrl {
        normalize_url(s).unwrap()
    }

    #[test]
    fn plain_200_is_alive() {
        let t = |_: &str| Ok(HttpResponse::status(200));
        let r = probe(&url("http://x.org/a"), &cfg(), &t);
        assert_eq!(r.final_status, FinalStatus::Http(200));
        assert!(r.alive);
        assert_eq!(r.redirect_hops, 0);
        assert_eq!(r.scheme_used, Scheme::Http);
    }

    #[test]
    fn redirect_chain_records_final_destination() {
        let t = |u: &str| {
            Ok(match u {
                "http://x.org/a" => HttpResponse::redirect(301, "/b"),
                "http://x.org/b" => HttpResponse::redirect(301, "https://www.x.org/c"),
                "https://www.x.org/c" => HttpResponse::status(200),
                _ => HttpResponse::status(404),
            })
        };
        let r = probe(&url("http://x.org/a"), &cfg(), &t);
        assert_eq!(r.final_status, FinalStatus::Http(200));
        assert_eq!(r.redirect_hops, 2);
        assert!(r.alive);
    }

    #[test]
    fn redirect_loop_exceeds_limit() {
        let calls = Mutex::new(0);
        let t = |_: &str| {
            *calls.lock().unwrap() += 1;
            Ok(HttpResponse::redirect(302, "/loop"))
        };
        let c = ProbeConfig {
            max_redirects: 3,
            ..cfg()
        };
        let r = probe(&url("http://x.org/loop"), &c, &t);
        assert_eq!(r.final_status, FinalStatus::Error(TransportErrorKind::TooManyRedirects));
        assert_eq!(r.redirect_hops, 3);
        assert!(!r.alive);
        assert_eq!(*calls.lock().unwrap(), 4);
    }

    #[test]
    fn exactly_max_redirects_is_fine() {
        let t = |u: &str| {
            let n: usize = u.rsplit('/').next().unwrap().parse().unwrap_or(0);
            Ok(if n < 2 {
                HttpResponse::redirect(301, format!("/{}", n + 1))
            } else {
                HttpResponse::status(200)
            })
        };
        let c = ProbeConfig {
            max_redirects: 2,
            ..cfg()
        };
        let r = probe(&url("http://x.org/0"), &c, &t);
        assert_eq!(r.final_status, FinalStatus::Http(200));
        assert_eq!(r.redirect_hops, 2);
    }

    #[test]
    fn redirect_without_location_is_final() {
        let t = |_: &str| Ok(HttpResponse::status(304));
        let r = probe(&url("http://x.org/a"), &cfg(), &t);
        assert_eq!(r.final_status, FinalStatus::Http(304));
        assert!(!r.alive);
    }

    #[test]
    fn connect_timeout_is_problematic() {
        let t = |_: &str| Err(TransportErrorKind::ConnectTimeout);
        let r = probe(&url("https://x.org"), &cfg(), &t);
        assert_eq!(r.final_status, FinalStatus::Error(TransportErrorKind::ConnectTimeout));
        assert_eq!(r.scheme_used, Scheme::Https);
        assert!(!r.alive);
    }

    #[test]
    fn schemeless_keeps_better_outcome() {
        let t = |u: &str| {
            if u.starts_with("https://") {
                Err(TransportErrorKind::SslError)
            } else {
                Ok(HttpResponse::status(200))
            }
        };
        let r = probe(&url("www.x.org/a"), &cfg(), &t);
        assert_eq!(r.scheme_used, Scheme::Http);
        assert!(r.alive);

        let t = |u: &str| Ok(HttpResponse::status(if u.starts_with("https") { 404 } else { 503 }));
        let r = probe(&url("www.x.org/a"), &cfg(), &t);
        assert_eq!(r.scheme_used, Scheme::Https);
        assert_eq!(r.final_status, FinalStatus::Http(404));
    }

    #[test]
    fn schemeless_tie_goes_to_https() {
        let t = |u: &str| Ok(HttpResponse::status(if u.starts_with("https") { 204 } else { 200 }));
        let r = probe(&url("www.x.org"), &cfg(), &t);
        assert_eq!(r.scheme_used, Scheme::Https);
        assert_eq!(r.final_status, FinalStatus::Http(204));
        assert!(!r.alive);
    }

    #[test]
    fn retry_after_honored_once() {
        let calls = Mutex::new(0);
        let t = |_: &str| {
            let mut n = calls.lock().unwrap();
            *n += 1;
            Ok(HttpResponse {
                status: 429,
                location: None,
                retry_after: Some(Duration::ZERO),
            })
        };
        let r = probe(&url("http://x.org"), &cfg(), &t);
        assert_eq!(r.final_status, FinalStatus::Http(429));
        assert_eq!(*calls.lock().unwrap(), 2);

        let calls = Mutex::new(Vec::new());
        let t = |_: &str| {
            let mut v = calls.lock().unwrap();
            v.push(());
            Ok(if v.len() == 1 {
                HttpResponse {
                    status: 429,
                    location: None,
                    retry_after: Some(Duration::ZERO),
                }
            } else {
                HttpResponse::status(200)
            })
        };
        assert!(probe(&url("http://x.org"), &cfg(), &t).alive);
    }

    #[test]
    fn plain_429_not_retried() {
        let calls = Mutex::new(0);
        let t = |_: &str| {
            *calls.lock().unwrap() += 1;
            Ok(HttpResponse::status(429))
        };
        assert!(!probe(&url("http://x.org"), &cfg(), &t).alive);
        assert_eq!(*calls.lock().unwrap(), 1);
    }

    #[test]
    fn ranking_order() {
        use FinalStatus::*;
        let ordered = [
            Error(TransportErrorKind::ConnectionError),
            Http(503),
            Http(404),
            Http(301),
            Http(200),
        ];
        for w in ordered.windows(2) {
            assert!(status_rank(w[0]) < status_rank(w[1]));
        }
    }
}

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use super::prober::probe_with_limiter;
use super::{ProbeCache, ProbeConfig, ProbeResult, Transport};
use crate::error::Result;
use crate::extract::NormalizedUrl;

#[derive(Debug, Default)]
struct DomainState {
    busy: bool,
    last_end: Option<Instant>,
}

/// Serializes requests per registrable domain and keeps at least `wait`
/// between the end of one request and the start of the next.
#[derive(Debug)]
pub struct DomainLimiter {
    wait: Duration,
    state: Mutex<HashMap<String, DomainState>>,
    freed: Condvar,
}

/// Held for the duration of one request.
pub struct DomainPermit<'a> {
    limiter: &'a DomainLimiter,
    domain: String,
}

impl DomainLimiter {
    pub fn new(wait: Duration) -> Self {
        DomainLimiter {
            wait,
            state: Mutex::new(HashMap::new()),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self, domain: &str) -> DomainPermit<'_> {
        let mut map = self.state.lock().unwrap();
        loop {
            let st = map.entry(domain.to_string()).or_default();
            if !st.busy {
                let ready = st.last_end.map(|t| t + self.wait);
                match ready {
                    Some(at) if at > Instant::now() => {
                        let left = at - Instant::now();
                        map = self.freed.wait_timeout(map, left).unwrap().0;
                        continue;
                    }
                    _ => {
                        st.busy = true;
                        break;
                    }
                }
            }
            map = self.freed.wait(map).unwrap();
        }
        DomainPermit {
            limiter: self,
            domain: domain.to_string(),
        }
    }
}

impl Drop for DomainPermit<'_> {
    fn drop(&mut self) {
        let mut map = self.limiter.state.lock().unwrap();
        if let Some(st) = map.get_mut(&self.domain) {
            st.busy = false;
            st.last_end = Some(Instant::now());
        }
        drop(map);
        self.limiter.freed.notify_all();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRun {
    /// One result per unique probeable canonical URL, in first-seen order.
    pub results: Vec<ProbeResult>,
    /// URLs probed over the network in this run.
    pub probed: usize,
    pub from_cache: usize,
    /// Canonical URLs skipped because they are not HTTP-probeable.
    pub unprobeable: Vec<String>,
}

/// Probes every unique URL not already cached (all of them when `force`),
/// one worker per registrable domain, at most `cfg.max_concurrent_domains` at once.
/// Each result is appended to `cache` as soon as it completes.
pub fn probe_all(
    urls: &[NormalizedUrl],
    cfg: &ProbeConfig,
    transport: &dyn Transport,
    cache: &mut ProbeCache,
    force: bool,
) -> Result<ProbeRun> {
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    let mut unprobeable = Vec::new();
    let mut by_domain: BTreeMap<&str, Vec<&NormalizedUrl>> = BTreeMap::new();
    for url in urls {
        if !seen.insert(url.canonical.as_str()) {
            continue;
        }
        if !url.is_http_probeable() {
            unprobeable.push(url.canonical.clone());
            continue;
        }
        order.push(url.canonical.as_str());
        if force || cache.get(&url.canonical).is_none() {
            by_domain.entry(url.domain.as_str()).or_default().push(url);
        }
    }

    let queue: Mutex<VecDeque<Vec<&NormalizedUrl>>> = Mutex::new(by_domain.into_values().collect());
    let workers = cfg.max_concurrent_domains.max(1).min(queue.lock().unwrap().len());
    let limiter = DomainLimiter::new(cfg.domain_wait);
    let stop = AtomicBool::new(false);
    let mut probed = 0;
    let mut failure = None;

    thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<ProbeResult>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (queue, limiter, stop) = (&queue, &limiter, &stop);
            scope.spawn(move || loop {
                let Some(group) = queue.lock().unwrap().pop_front() else {
                    break;
                };
                for url in group {
                    if stop.load(Ordering::Relaxed) {
                        return;
                    }
                    let result = probe_with_limiter(url, cfg, transport, limiter);
                    if tx.send(result).is_err() {
                        return;
                    }
                }
            });
        }
        drop(tx);
        for result in rx {
            if failure.is_some() {
                continue;
            }
            match cache.append(result) {
                Ok(()) => probed += 1,
                Err(e) => {
                    stop.store(true, Ordering::Relaxed);
                    failure = Some(e);
                }
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let results: Vec<ProbeResult> = order
        .iter()
        .map(|c| cache.get(c).expect("every probeable URL has a result").clone())
        .collect();
    Ok(ProbeRun {
        from_cache: results.len() - probed,
        results,
        probed,
        unprobeable,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::extract::normalize_url;
    use crate::probe::{FinalStatus, HttpResponse, TransportErrorKind};

    /// Stub transport that logs each call with its start and end instants.
    #[derive(Default)]
    struct Logged {
        calls: Mutex<Vec<(String, Instant, Instant)>>,
        delay: Duration,
    }

    impl Transport for Logged {
        fn get(&self, url: &str) -> Result<HttpResponse, TransportErrorKind> {
            let start = Instant::now();
            thread::sleep(self.delay);
            self.calls.lock().unwrap().push((url.to_string(), start, Instant::now()));
            if url.contains("/dead") {
                Ok(HttpResponse::status(404))
            } else {
                Ok(HttpResponse::status(200))
            }
        }
    }

    fn urls(list: &[&str]) -> Vec<NormalizedUrl> {
        list.iter().map(|u| normalize_url(u).unwrap()).collect()
    }

    fn cfg(wait_ms: u64) -> ProbeConfig {
        ProbeConfig {
            domain_wait: Duration::from_millis(wait_ms),
            max_concurrent_domains: 4,
            ..ProbeConfig::default()
        }
    }

    #[test]
    fn empty_set_makes_no_calls() {
        let t = Logged::default();
        let run = probe_all(&[], &cfg(0), &t, &mut ProbeCache::in_memory(), false).unwrap();
        assert!(run.results.is_empty());
        assert!(t.calls.lock().unwrap().is_empty());
    }

    #[test]
    fn cached_urls_skipped() {
        let t = Logged::default();
        let mut cache = ProbeCache::in_memory();
        let list = urls(&["http://a.org/1", "http://b.org/dead"]);
        probe_all(&list[..1], &cfg(0), &t, &mut cache, false).unwrap();
        t.calls.lock().unwrap().clear();
        let run = probe_all(&list, &cfg(0), &t, &mut cache, false).unwrap();
        assert_eq!(t.calls.lock().unwrap().len(), 1);
        assert_eq!(run.probed, 1);
        assert_eq!(run.from_cache, 1);
        assert_eq!(run.results[1].final_status, FinalStatus::Http(404));

        t.calls.lock().unwrap().clear();
        let again = probe_all(&list, &cfg(0), &t, &mut cache, false).unwrap();
        assert!(t.calls.lock().unwrap().is_empty());
        let verdicts = |r: &ProbeRun| r.results.iter().map(|x| x.alive).collect::<Vec<_>>();
        assert_eq!(verdicts(&again), verdicts(&run));

        probe_all(&list, &cfg(0), &t, &mut cache, true).unwrap();
        assert_eq!(t.calls.lock().unwrap().len(), 2);
    }

    #[test]
    fn duplicates_and_ftp() {
        let t = Logged::default();
        let list = urls(&["http://a.org/1", "HTTP://A.org/1/", "ftp://a.org/f"]);
        let run = probe_all(&list, &cfg(0), &t, &mut ProbeCache::in_memory(), false).unwrap();
        assert_eq!(run.results.len(), 1);
        assert_eq!(run.unprobeable, vec!["ftp://a.org/f".to_string()]);
        assert_eq!(t.calls.lock().unwrap().len(), 1);
    }

    #[test]
    fn same_domain_requests_spaced() {
        let t = Logged {
            delay: Duration::from_millis(5),
            ..Default::default()
        };
        let list = urls(&[
            "http://a.org/1",
            "http://www.a.org/2",
            "http://a.org/3",
            "http://b.org/1",
            "http://b.org/2",
        ]);
        let started = Instant::now();
        let run = probe_all(&list, &cfg(150), &t, &mut ProbeCache::in_memory(), false).unwrap();
        assert_eq!(run.results.len(), 5);
        let calls = t.calls.lock().unwrap();
        for domain in ["a.org", "b.org"] {
            let mut starts: Vec<Instant> = calls
                .iter()
                .filter(|(u, _, _)| u.contains(domain))
                .map(|c| c.1)
                .collect();
            starts.sort();
            for w in starts.windows(2) {
                assert!(w[1] - w[0] >= Duration::from_millis(150));
            }
        }
        // Two domains in parallel: about 2 waits, not 3.
        assert!(started.elapsed() < Duration::from_millis(420));
    }

    #[test]
    fn limiter_shared_across_threads() {
        let limiter = Arc::new(DomainLimiter::new(Duration::from_millis(40)));
        let log = Arc::new(Mutex::new(Vec::new()));
        thread::scope(|s| {
            for _ in 0..4 {
                let (limiter, log) = (limiter.clone(), log.clone());
                s.spawn(move || {
                    let _p = limiter.acquire("x.org");
                    log.lock().unwrap().push(Instant::now());
                });
            }
        });
        let mut starts = log.lock().unwrap().clone();
        starts.sort();
        for w in starts.windows(2) {
            assert!(w[1] - w[0] >= Duration::from_millis(40));
        }
    }

    #[test]
    fn file_cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("linkmine-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("probe.jsonl");
        let _ = std::fs::remove_file(&path);
        let t = Logged::default();
        let list = urls(&["http://a.org/1", "http://b.org/dead"]);
        {
            let mut cache = ProbeCache::open(&path).unwrap();
            probe_all(&list, &cfg(0), &t, &mut cache, false).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let mut cache = ProbeCache::open(&path).unwrap();
        assert_eq!(cache.len(), 2);
        t.calls.lock().unwrap().clear();
        probe_all(&list, &cfg(0), &t, &mut cache, false).unwrap();
        assert!(t.calls.lock().unwrap().is_empty());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn unwritable_cache_fails_before_network() {
        let path = std::path::Path::new("/nonexistent-dir/probe.jsonl");
        assert!(ProbeCache::open(path).is_err());
    }
}

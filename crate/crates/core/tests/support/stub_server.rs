//! Minimal HTTP/1.1 server for prober tests.
//!
//! Every host name is routed to the same listener; the request path picks the
//! response. Each request head is logged with the instant it was received.

#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Hit {
    pub host: String,
    pub path: String,
    pub at: Instant,
}

pub struct StubServer {
    pub addr: SocketAddr,
    /// Accepts nothing: connects to this address hang.
    pub hang_addr: SocketAddr,
    /// Nothing listens here.
    pub closed_addr: SocketAddr,
    pub hits: Arc<Mutex<Vec<Hit>>>,
    _hang: (socket2::Socket, Vec<TcpStream>),
}

impl StubServer {
    pub fn start() -> StubServer {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(Mutex::new(Vec::new()));
        let log = hits.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let log = log.clone();
                thread::spawn(move || serve(stream, log));
            }
        });
        let (hang_addr, hang) = hanging_listener();
        let closed_addr = {
            let l = TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap()
        };
        StubServer {
            addr,
            hang_addr,
            closed_addr,
            hits,
            _hang: hang,
        }
    }

    pub fn hits(&self) -> Vec<Hit> {
        self.hits.lock().unwrap().clone()
    }

    pub fn clear(&self) {
        self.hits.lock().unwrap().clear();
    }
}

/// A listener with a zero backlog whose accept queue is already full.
fn hanging_listener() -> (SocketAddr, (socket2::Socket, Vec<TcpStream>)) {
    use socket2::{Domain, Socket, Type};
    let sock = Socket::new(Domain::IPV4, Type::STREAM, None).unwrap();
    sock.bind(&"127.0.0.1:0".parse::<SocketAddr>().unwrap().into())
        .unwrap();
    sock.listen(0).unwrap();
    let addr = sock.local_addr().unwrap().as_socket().unwrap();
    let mut fillers = Vec::new();
    for _ in 0..8 {
        match TcpStream::connect_timeout(&addr, Duration::from_millis(200)) {
            Ok(s) => fillers.push(s),
            Err(_) => break,
        }
    }
    (addr, (sock, fillers))
}

fn route(path: &str) -> (u16, &'static str, Vec<(&'static str, String)>) {
    match path {
        "/ok" | "/" => (200, "OK", vec![]),
        "/forbidden" => (403, "Forbidden", vec![]),
        "/missing" => (404, "Not Found", vec![]),
        "/busy" => (429, "Too Many Requests", vec![("Retry-After", "0".into())]),
        "/unavailable" => (503, "Service Unavailable", vec![]),
        "/r1" => (301, "Moved Permanently", vec![("Location", "/r2".into())]),
        "/r2" => (301, "Moved Permanently", vec![("Location", "/ok".into())]),
        "/loop" => (302, "Found", vec![("Location", "/loop".into())]),
        _ => (404, "Not Found", vec![]),
    }
}

fn serve(mut stream: TcpStream, log: Arc<Mutex<Vec<Hit>>>) {
    let _ = stream.set_read_timeout(Some(Duration::from_secs(10)));
    let mut buf = Vec::new();
    let mut chunk = [0u8; 1024];
    while !buf.windows(4).any(|w| w == b"\r\n\r\n") {
        match stream.read(&mut chunk) {
            Ok(0) | Err(_) => break,
            Ok(n) => buf.extend_from_slice(&chunk[..n]),
        }
        if buf.first() == Some(&0x16) {
            // TLS handshake on a plain listener.
            let _ = stream.write_all(b"HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
            return;
        }
        if buf.len() > 64 * 1024 {
            break;
        }
    }
    let at = Instant::now();
    let head = String::from_utf8_lossy(&buf);
    let mut lines = head.lines();
    let request_line = lines.next().unwrap_or_default();
    let mut parts = request_line.split_whitespace();
    let (method, path) = (parts.next().unwrap_or_default(), parts.next().unwrap_or_default());
    if method != "GET" {
        let _ = stream.write_all(b"HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
        return;
    }
    let host = lines
        .filter_map(|l| l.split_once(':'))
        .find(|(k, _)| k.eq_ignore_ascii_case("host"))
        .map(|(_, v)| v.trim().rsplit_once(':').map_or(v.trim(), |(h, _)| h).to_string())
        .unwrap_or_default();
    log.lock().unwrap().push(Hit {
        host,
        path: path.to_string(),
        at,
    });
    if path == "/slow" {
        thread::sleep(Duration::from_secs(10));
        return;
    }
    let (code, reason, headers) = route(path);
    let mut resp = format!("HTTP/1.1 {code} {reason}\r\nContent-Length: 2\r\nConnection: close\r\n");
    for (k, v) in headers {
        resp.push_str(&format!("{k}: {v}\r\n"));
    }
    resp.push_str("\r\nok");
    let _ = stream.write_all(resp.as_bytes());
}

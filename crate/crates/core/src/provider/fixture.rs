//! Local HTTP citation index for tests: serves an offline snapshot through
//! the page protocol [`RemoteProvider`](super::RemoteProvider) expects, with
//! optional rate limiting (HTTP 429 once the per-second quota is used up).
//!
//! Routes: `GET /citers?id=..&cursor=..&n=..` and
//! `GET /resolve?doi=..&title=..&year=..`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde_json::json;

use super::{CitationProvider, OfflineProvider, ProviderConfig, ProviderMode};
use crate::corpus::ReferenceRecord;
use crate::graph::CitationGraph;

#[derive(Default)]
struct Log {
    arrivals: Vec<Instant>,
    rejected: usize,
}

pub struct FixtureServer {
    server: Arc<tiny_http::Server>,
    url: String,
    log: Arc<Mutex<Log>>,
    handle: Option<JoinHandle<()>>,
}

impl FixtureServer {
    /// Serves `graph` on an ephemeral local port. With `rate_limit`, at most
    /// that many requests are answered per sliding second.
    pub fn start(graph: CitationGraph, page_size: usize, rate_limit: Option<f64>) -> std::io::Result<Self> {
        let offline = OfflineProvider::from_graph(graph, page_size)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").map_err(std::io::Error::other)?);
        let port = server.server_addr().to_ip().map(|a| a.port()).unwrap_or_default();
        let log = Arc::new(Mutex::new(Log::default()));
        let handle = {
            let (server, log) = (Arc::clone(&server), Arc::clone(&log));
            std::thread::spawn(move || serve(&server, &offline, rate_limit, &log))
        };
        Ok(FixtureServer {
            server,
            url: format!("http://127.0.0.1:{port}"),
            log,
            handle: Some(handle),
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// Remote provider settings pointing at this server.
    pub fn provider_config(&self, page_size: usize, rate_limit_per_sec: f64) -> ProviderConfig {
        ProviderConfig {
            mode: ProviderMode::Remote,
            endpoint_url: Some(format!("{}/citers?id={{id}}&cursor={{cursor}}&n={{page_size}}", self.url)),
            resolve_url: Some(format!("{}/resolve?doi={{doi}}&title={{title}}&year={{year}}", self.url)),
            rate_limit_per_sec,
            page_size,
            backoff_ms: 50,
            timeout_secs: 10,
            ..ProviderConfig::default()
        }
    }

    /// Number of requests received so far, rejected ones included.
    pub fn request_count(&self) -> usize {
        self.log.lock().expect("log lock").arrivals.len()
    }

    /// Requests answered with HTTP 429.
    pub fn rejected_count(&self) -> usize {
        self.log.lock().expect("log lock").rejected
    }

    /// Largest number of requests that arrived within any interval of
    /// length `window`.
    pub fn max_in_window(&self, window: Duration) -> usize {
        let arrivals = self.log.lock().expect("log lock").arrivals.clone();
        let mut best = 0;
        let mut start = 0;
        for end in 0..arrivals.len() {
            while arrivals[end].duration_since(arrivals[start]) >= window {
                start += 1;
            }
            best = best.max(end - start + 1);
        }
        best
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve(server: &tiny_http::Server, offline: &OfflineProvider, rate_limit: Option<f64>, log: &Mutex<Log>) {
    let mut answered: VecDeque<Instant> = VecDeque::new();
    for request in server.incoming_requests() {
        let now = Instant::now();
        log.lock().expect("log lock").arrivals.push(now);
        while answered.front().is_some_and(|t| now.duration_since(*t) >= Duration::from_secs(1)) {
            answered.pop_front();
        }
        let (status, body) = match rate_limit {
            Some(limit) if answered.len() as f64 >= limit => {
                log.lock().expect("log lock").rejected += 1;
                let header = tiny_http::Header::from_bytes("Retry-After", "1").expect("static header");
                let _ = request.respond(tiny_http::Response::from_string("rate limited").with_status_code(429).with_header(header));
                continue;
            }
            _ => {
                answered.push_back(now);
                route(offline, request.url())
            }
        };
        let json = tiny_http::Header::from_bytes("Content-Type", "application/json").expect("static header");
        let _ = request.respond(tiny_http::Response::from_string(body).with_status_code(status).with_header(json));
    }
}

fn route(offline: &OfflineProvider, url: &str) -> (u16, String) {
    let (path, query) = url.split_once('?').unwrap_or((url, ""));
    let params: HashMap<String, String> = form_urlencoded::parse(query.as_bytes()).into_owned().collect();
    let param = |k: &str| params.get(k).filter(|v| !v.is_empty()).cloned();
    match path {
        "/citers" => {
            let Some(id) = param("id") else {
                return (400, "missing id".into());
            };
            let target = super::PaperId::new(&id);
            match offline.fetch_citers(&target, param("cursor").as_deref()) {
                Ok(page) => (
                    200,
                    json!({"citers": page.citers, "next_cursor": page.cursor, "complete": page.complete}).to_string(),
                ),
                Err(e) if e.is_not_found() => (404, e.to_string()),
                Err(e) => (400, e.to_string()),
            }
        }
        "/resolve" => {
            let record = ReferenceRecord {
                raw_key: "query".into(),
                title: param("title").unwrap_or_default(),
                authors: Vec::new(),
                year: param("year").and_then(|y| y.parse().ok()),
                chapter_tags: BTreeSet::new(),
                doi: param("doi"),
            };
            match offline.resolve(&record) {
                Ok(paper) => (200, serde_json::to_string(&paper).expect("paper serializes")),
                Err(e) => (404, e.to_string()),
            }
        }
        _ => (404, "no such route".into()),
    }
}

use std::collections::HashSet;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::Deserialize;

use super::{doi_id, CitationPage, CitationProvider, PaperId, ProviderConfig, ProviderError};
use crate::corpus::ReferenceRecord;

const COMPONENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');
const MAX_RETRY_AFTER: Duration = Duration::from_secs(60);

/// Global request spacing shared by every worker. Each caller reserves the
/// next free slot, so any window of length `w` holds at most
/// `rate * w + 1` requests.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(per_second: f64) -> Self {
        RateLimiter {
            interval: Duration::from_secs_f64(1.0 / per_second),
            next_slot: Mutex::new(None),
        }
    }

    /// Blocks until the caller may issue one request.
    pub fn acquire(&self) {
        let slot = {
            let mut next = self.next_slot.lock().expect("rate limiter poisoned");
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.interval);
            slot
        };
        let now = Instant::now();
        if slot > now {
            std::thread::sleep(slot - now);
        }
    }
}

#[derive(Deserialize)]
struct PageBody {
    citers: Vec<PaperId>,
    #[serde(default)]
    next_cursor: Option<String>,
    #[serde(default)]
    complete: Option<bool>,
}

/// HTTP citation-index client.
///
/// Citer pages are fetched from `endpoint_url` and must answer with
/// `{"citers": [{"id", "title", "year"}...], "next_cursor": str|null,
/// "complete": bool}`; `complete` defaults to "no next cursor". Resolution
/// uses `resolve_url`, answering `{"id", "title", "year"}` or 404. Without a
/// resolve URL, references resolve to their DOI-derived id.
pub struct RemoteProvider {
    config: ProviderConfig,
    agent: ureq::Agent,
    limiter: RateLimiter,
}

enum Attempt<T> {
    Done(Result<T, ProviderError>),
    Retry(String, Option<Duration>),
}

impl RemoteProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        config.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .build()
            .into();
        Ok(RemoteProvider {
            limiter: RateLimiter::new(config.rate_limit_per_sec),
            agent,
            config,
        })
    }

    pub fn limiter(&self) -> &RateLimiter {
        &self.limiter
    }

    fn get<T>(&self, url: &str, what: &str, parse: impl Fn(&str) -> Result<T, ProviderError>) -> Result<T, ProviderError> {
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            self.limiter.acquire();
            match self.attempt(url, what, &parse) {
                Attempt::Done(result) => return result,
                Attempt::Retry(message, retry_after) => {
                    log::debug!("{url}: {message} (attempt {})", attempt + 1);
                    last = message;
                    if attempt + 1 < attempts {
                        let backoff = Duration::from_millis(self.config.backoff_ms.saturating_mul(1 << attempt.min(16)));
                        std::thread::sleep(retry_after.unwrap_or(backoff).min(MAX_RETRY_AFTER));
                    }
                }
            }
        }
        Err(ProviderError::Retryable {
            message: last,
            attempts,
        })
    }

    fn attempt<T>(&self, url: &str, what: &str, parse: &impl Fn(&str) -> Result<T, ProviderError>) -> Attempt<T> {
        let mut request = self.agent.get(url);
        if let Some(key) = &self.config.api_key {
            request = request.header(self.config.api_key_header.as_str(), key.as_str());
        }
        let mut response = match request.call() {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(format!("transport: {e}"), None),
        };
        let status = response.status().as_u16();
        match status {
            200 => match response.body_mut().read_to_string() {
                Ok(body) => Attempt::Done(parse(&body)),
                Err(e) => Attempt::Retry(format!("reading body: {e}"), None),
            },
            404 => Attempt::Done(Err(ProviderError::NotFound(what.to_string()))),
            429 | 500..=599 => {
                let retry_after = response
                    .headers()
                    .get("retry-after")
                    .and_then(|v| v.to_str().ok())
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .filter(|s| s.is_finite() && *s >= 0.0)
                    .map(Duration::from_secs_f64);
                Attempt::Retry(format!("HTTP {status}"), retry_after)
            }
            _ => Attempt::Done(Err(ProviderError::Protocol(format!("HTTP {status} for {what}")))),
        }
    }

    fn citers_url(&self, id: &str, cursor: Option<&str>) -> String {
        self.config
            .endpoint_url
            .as_deref()
            .expect("validated")
            .replace("{id}", &encode(id))
            .replace("{cursor}", &encode(cursor.unwrap_or("")))
            .replace("{page_size}", &self.config.page_size.to_string())
    }
}

fn encode(s: &str) -> String {
    utf8_percent_encode(s, COMPONENT).to_string()
}

impl CitationProvider for RemoteProvider {
    fn resolve(&self, record: &ReferenceRecord) -> Result<PaperId, ProviderError> {
        let Some(template) = &self.config.resolve_url else {
            return match &record.doi {
                Some(doi) => Ok(PaperId {
                    id: doi_id(doi),
                    title: Some(record.title.clone()),
                    year: record.year,
                }),
                None => Err(ProviderError::NotFound(record.raw_key.clone())),
            };
        };
        let url = template
            .replace("{doi}", &encode(record.doi.as_deref().unwrap_or("")))
            .replace("{title}", &encode(&record.title))
            .replace("{year}", &record.year.map(|y| y.to_string()).unwrap_or_default());
        self.get(&url, &record.raw_key, |body| {
            serde_json::from_str::<PaperId>(body)
                .map_err(|e| ProviderError::Protocol(format!("resolve response: {e}")))
                .and_then(|p| {
                    if p.id.is_empty() {
                        Err(ProviderError::Protocol("empty id in resolve response".into()))
                    } else {
                        Ok(p)
                    }
                })
        })
    }

    fn fetch_citers(&self, id: &PaperId, cursor: Option<&str>) -> Result<CitationPage, ProviderError> {
        let url = self.citers_url(&id.id, cursor);
        self.get(&url, &id.id, |body| {
            let page: PageBody = serde_json::from_str(body)
                .map_err(|e| ProviderError::Protocol(format!("citers response: {e}")))?;
            let mut seen = HashSet::new();
            let citers: Vec<PaperId> = page
                .citers
                .into_iter()
                .filter(|p| !p.id.is_empty() && seen.insert(p.id.clone()))
                .collect();
            let cursor = page.next_cursor.filter(|c| !c.is_empty());
            let complete = page.complete.unwrap_or(cursor.is_none()) && cursor.is_none();
            Ok(CitationPage {
                target: id.clone(),
                citers,
                cursor,
                complete,
            })
        })
    }
}

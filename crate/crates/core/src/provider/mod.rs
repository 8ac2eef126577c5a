//! Citation-index access: resolving seed references and listing the papers
//! that cite a given paper, page by page.
//!
//! Two backends implement [`CitationProvider`]: [`OfflineProvider`] reads a
//! snapshot directory, [`RemoteProvider`] talks to an HTTP API. Either can be
//! wrapped in a [`CachedProvider`] that persists every answer to an
//! append-only log so interrupted crawls resume without re-fetching.

mod cache;
#[cfg(feature = "fixture-server")]
pub mod fixture;
mod offline;
mod remote;

pub use cache::CachedProvider;
pub use offline::OfflineProvider;
pub use remote::{RateLimiter, RemoteProvider};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ReferenceRecord;

/// Environment variable that overrides the configured API key.
pub const API_KEY_ENV: &str = "CITESCOPE_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PaperId {
    pub id: String,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub year: Option<i32>,
}

impl PaperId {
    pub fn new(id: &str) -> Self {
        PaperId {
            id: id.to_string(),
            title: None,
            year: None,
        }
    }
}

/// One page of papers citing `target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationPage {
    pub target: PaperId,
    pub citers: Vec<PaperId>,
    /// Continuation token; `None` on the last page.
    pub cursor: Option<String>,
    /// The provider attests that every citer of `target` has been listed.
    pub complete: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    /// Terminal: the paper is unknown to the index.
    #[error("not found: {0}")]
    NotFound(String),
    /// Transient failure that survived every retry.
    #[error("request failed after {attempts} attempts: {message}")]
    Retryable { message: String, attempts: u32 },
    #[error("provider configuration: {0}")]
    Config(String),
    #[error("malformed provider data: {0}")]
    Protocol(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl ProviderError {
    pub fn is_not_found(&self) -> bool {
        matches!(self, ProviderError::NotFound(_))
    }
}

impl From<std::io::Error> for ProviderError {
    fn from(e: std::io::Error) -> Self {
        ProviderError::Io(e.to_string())
    }
}

/// Shared by all crawl workers; implementations must be thread-safe.
pub trait CitationProvider: Send + Sync {
    /// Canonical id of a seed reference: DOI first, then title and year.
    fn resolve(&self, record: &ReferenceRecord) -> Result<PaperId, ProviderError>;

    fn fetch_citers(&self, id: &PaperId, cursor: Option<&str>) -> Result<CitationPage, ProviderError>;
}

impl<P: CitationProvider + ?Sized> CitationProvider for Box<P> {
    fn resolve(&self, record: &ReferenceRecord) -> Result<PaperId, ProviderError> {
        (**self).resolve(record)
    }

    fn fetch_citers(&self, id: &PaperId, cursor: Option<&str>) -> Result<CitationPage, ProviderError> {
        (**self).fetch_citers(id, cursor)
    }
}

/// Id under which a DOI-identified paper is stored.
pub fn doi_id(doi: &str) -> String {
    format!("doi:{}", doi.trim().to_lowercase())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderMode {
    Offline,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub mode: ProviderMode,
    pub snapshot_path: Option<PathBuf>,
    /// URL template for citer pages; `{id}`, `{cursor}` and `{page_size}`
    /// are substituted.
    pub endpoint_url: Option<String>,
    /// URL template for reference resolution; `{doi}`, `{title}` and
    /// `{year}` are substituted.
    pub resolve_url: Option<String>,
    pub api_key: Option<String>,
    pub api_key_header: String,
    pub rate_limit_per_sec: f64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub page_size: usize,
    pub timeout_secs: u64,
    pub cache_path: Option<PathBuf>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            mode: ProviderMode::Offline,
            snapshot_path: None,
            endpoint_url: None,
            resolve_url: None,
            api_key: None,
            api_key_header: "x-api-key".to_string(),
            rate_limit_per_sec: 5.0,
            max_retries: 5,
            backoff_ms: 500,
            page_size: 100,
            timeout_secs: 30,
            cache_path: None,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), ProviderError> {
        if !(self.rate_limit_per_sec > 0.0 && self.rate_limit_per_sec.is_finite()) {
            return Err(ProviderError::Config("rate_limit_per_sec must be positive".into()));
        }
        if self.page_size == 0 {
            return Err(ProviderError::Config("page_size must be at least 1".into()));
        }
        match self.mode {
            ProviderMode::Offline if self.snapshot_path.is_none() => {
                Err(ProviderError::Config("offline mode needs snapshot_path".into()))
            }
            ProviderMode::Remote if self.endpoint_url.is_none() => {
                Err(ProviderError::Config("remote mode needs endpoint_url".into()))
            }
            _ => Ok(()),
        }
    }

    /// Applies `CITESCOPE_API_KEY` when set.
    pub fn with_env(mut self) -> Self {
        if let Ok(key) = std::env::var(API_KEY_ENV) {
            if !key.is_empty() {
                self.api_key = Some(key);
            }
        }
        self
    }
}

/// Builds the provider described by `config`, wrapped in a cache when a
/// cache path is configured.
pub fn open_provider(config: &ProviderConfig) -> Result<Box<dyn CitationProvider>, ProviderError> {
    config.validate()?;
    let inner: Box<dyn CitationProvider> = match config.mode {
        ProviderMode::Offline => {
            let path = config.snapshot_path.as_ref().expect("validated");
            Box::new(OfflineProvider::open(path, config.page_size)?)
        }
        ProviderMode::Remote => Box::new(RemoteProvider::new(config.clone())?),
    };
    Ok(match &config.cache_path {
        Some(path) => Box::new(CachedProvider::open(inner, path)?),
        None => inner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = ProviderConfig {
            snapshot_path: Some("snap".into()),
            ..Default::default()
        };
        assert!(c.validate().is_ok());
        c.page_size = 0;
        assert!(c.validate().is_err());
        c.page_size = 1;
        c.rate_limit_per_sec = 0.0;
        assert!(c.validate().is_err());
        c.rate_limit_per_sec = 1.0;
        c.mode = ProviderMode::Remote;
        assert!(c.validate().is_err());
    }

    #[test]
    fn doi_ids_are_case_folded() {
        assert_eq!(doi_id(" 10.1126/Science.1 "), "doi:10.1126/science.1");
    }
}

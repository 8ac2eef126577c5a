use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{CitationPage, CitationProvider, PaperId, ProviderError};
use crate::corpus::{normalize_title, ReferenceRecord};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Entry {
    /// `page: None` records a terminal not-found answer.
    Page {
        target: String,
        cursor: Option<String>,
        page: Option<CitationPage>,
    },
    Resolve {
        key: String,
        paper: Option<PaperId>,
    },
}

type PageKey = (String, Option<String>);

/// Write-through cache over another provider, persisted as a JSON-lines log.
///
/// The log is append-only and replayed on open; a torn final line from an
/// interrupted run is skipped. Not-found answers are cached too; transient
/// errors are not.
pub struct CachedProvider<P> {
    inner: P,
    path: PathBuf,
    pages: RwLock<HashMap<PageKey, Option<CitationPage>>>,
    resolutions: RwLock<HashMap<String, Option<PaperId>>>,
    log: Mutex<File>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<P: CitationProvider> CachedProvider<P> {
    pub fn open(inner: P, path: &Path) -> Result<Self, ProviderError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let mut file = OpenOptions::new().create(true).read(true).append(true).open(path)?;
        let mut pages = HashMap::new();
        let mut resolutions = HashMap::new();
        for (n, line) in BufReader::new(&file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Entry>(&line) {
                Ok(Entry::Page { target, cursor, page }) => {
                    pages.insert((target, cursor), page);
                }
                Ok(Entry::Resolve { key, paper }) => {
                    resolutions.insert(key, paper);
                }
                Err(e) => log::warn!("{}:{}: skipping unreadable cache entry: {e}", path.display(), n + 1),
            }
        }
        // Terminate a torn last line so new entries start cleanly.
        let len = file.seek(SeekFrom::End(0))?;
        if len > 0 {
            let mut last = [0u8; 1];
            file.seek(SeekFrom::Start(len - 1))?;
            file.read_exact(&mut last)?;
            if last[0] != b'\n' {
                file.write_all(b"\n")?;
            }
        }
        Ok(CachedProvider {
            inner,
            path: path.to_path_buf(),
            pages: RwLock::new(pages),
            resolutions: RwLock::new(resolutions),
            log: Mutex::new(file),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    /// (cache hits, cache misses) since open.
    pub fn counters(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    fn append(&self, entry: &Entry) -> Result<(), ProviderError> {
        let mut line = serde_json::to_string(entry).expect("cache entry serializes");
        line.push('\n');
        let mut file = self.log.lock().expect("cache log poisoned");
        file.write_all(line.as_bytes())?;
        Ok(())
    }
}

fn resolve_key(record: &ReferenceRecord) -> String {
    format!(
        "{}\t{}\t{}",
        record.doi.as_deref().map(str::to_lowercase).unwrap_or_default(),
        normalize_title(&record.title),
        record.year.map(|y| y.to_string()).unwrap_or_default()
    )
}

impl<P: CitationProvider> CitationProvider for CachedProvider<P> {
    fn resolve(&self, record: &ReferenceRecord) -> Result<PaperId, ProviderError> {
        let key = resolve_key(record);
        let not_found = || ProviderError::NotFound(record.raw_key.clone());
        if let Some(cached) = self.resolutions.read().expect("cache poisoned").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return cached.clone().ok_or_else(not_found);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let paper = match self.inner.resolve(record) {
            Ok(p) => Some(p),
            Err(e) if e.is_not_found() => None,
            Err(e) => return Err(e),
        };
        self.append(&Entry::Resolve {
            key: key.clone(),
            paper: paper.clone(),
        })?;
        self.resolutions.write().expect("cache poisoned").insert(key, paper.clone());
        paper.ok_or_else(not_found)
    }

    fn fetch_citers(&self, id: &PaperId, cursor: Option<&str>) -> Result<CitationPage, ProviderError> {
        let key = (id.id.clone(), cursor.map(str::to_string));
        let not_found = || ProviderError::NotFound(id.id.clone());
        if let Some(cached) = self.pages.read().expect("cache poisoned").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return cached.clone().ok_or_else(not_found);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let page = match self.inner.fetch_citers(id, cursor) {
            Ok(p) => Some(p),
            Err(e) if e.is_not_found() => None,
            Err(e) => return Err(e),
        };
        self.append(&Entry::Page {
            target: key.0.clone(),
            cursor: key.1.clone(),
            page: page.clone(),
        })?;
        self.pages.write().expect("cache poisoned").insert(key, page.clone());
        page.ok_or_else(not_found)
    }
}

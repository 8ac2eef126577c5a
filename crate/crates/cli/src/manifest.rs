use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::PipelineError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Unix seconds.
    pub completed_at: u64,
    /// Checksums of the files the stage read.
    pub inputs: BTreeMap<String, String>,
    /// Checksums of the files the stage wrote, relative to the output
    /// directory.
    pub artifacts: BTreeMap<String, String>,
}

/// Progress record of one output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub created_at: u64,
    pub updated_at: u64,
    /// Completed stages by name.
    pub stages: BTreeMap<String, StageRecord>,
}

pub fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_checksum(path: &Path) -> Option<String> {
    fs::read(path).ok().map(|b| sha256_hex(&b))
}

impl RunManifest {
    pub fn new(config_hash: &str) -> Self {
        let t = now();
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash.to_string(),
            created_at: t,
            updated_at: t,
            stages: BTreeMap::new(),
        }
    }

    pub fn load(out_dir: &Path) -> Result<Option<Self>, PipelineError> {
        let path = out_dir.join(MANIFEST_FILE);
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(PipelineError::io(&path, e)),
        }
    }

    pub fn save(&mut self, out_dir: &Path) -> Result<(), PipelineError> {
        self.updated_at = now();
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        write_atomic(&out_dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn is_complete(&self, stage: &str) -> bool {
        self.stages.contains_key(stage)
    }

    /// True when every artifact of `stage` is on disk with its recorded
    /// checksum.
    pub fn artifacts_intact(&self, stage: &str, out_dir: &Path) -> bool {
        self.stages.get(stage).is_some_and(|r| {
            r.artifacts
                .iter()
                .all(|(rel, sum)| file_checksum(&out_dir.join(rel)).as_deref() == Some(sum.as_str()))
        })
    }
}

/// Writes through a temporary sibling so readers never see partial files.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes).map_err(|e| PipelineError::io(path, e))?;
    fs::rename(&tmp, path).map_err(|e| PipelineError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_and_integrity() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("abc");
        write_atomic(&dir.path().join("a/x.tsv"), b"hello").unwrap();
        m.stages.insert(
            "ingest".into(),
            StageRecord {
                completed_at: 1,
                inputs: BTreeMap::new(),
                artifacts: [("a/x.tsv".to_string(), sha256_hex(b"hello"))].into(),
            },
        );
        m.save(dir.path()).unwrap();
        let back = RunManifest::load(dir.path()).unwrap().unwrap();
        assert_eq!(back.stages, m.stages);
        assert!(back.artifacts_intact("ingest", dir.path()));
        fs::write(dir.path().join("a/x.tsv"), b"changed").unwrap();
        assert!(!back.artifacts_intact("ingest", dir.path()));
        assert!(!back.artifacts_intact("crawl", dir.path()));
        assert_eq!(RunManifest::load(&dir.path().join("none")).unwrap(), None);
    }
}

//! Pipeline configuration, read from a TOML document.
//!
//! Every analysis parameter has a default reproducing the reference study
//! (depth-2 crawl, resolution 1, 1% main-community threshold); a config file
//! only needs the seed bibliography and a provider.

use std::fs;
use std::path::{Path, PathBuf};

use citescope_core::metrics::{LevelFilter, OverlapIndex, StdKind};
use citescope_core::provider::ProviderConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Graphml,
    Edgelist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed_path: PathBuf,
    pub exclusions_path: Option<PathBuf>,
    pub provider: ProviderConfig,
    pub depth: u8,
    pub budget: Option<u64>,
    pub workers: usize,
    pub resolution: f64,
    pub rng_seed: u64,
    /// Communities whose cumulated relative size stays below this are
    /// left out of the rank-size fit and sub-community detection.
    pub main_community_threshold: f64,
    /// Symmetrize with weight 2 on reciprocal citation pairs.
    pub weighted_symmetrize: bool,
    /// Representative papers listed per community.
    pub top_k: usize,
    /// Number of largest communities in the inter-citation table.
    pub inter_citation_communities: usize,
    pub composition_level: LevelFilter,
    pub overlap_index: OverlapIndex,
    pub znorm_std: StdKind,
    /// Also write long-format `row col value` tables for plotting.
    pub plot_data: bool,
    pub export_formats: Vec<ExportFormat>,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed_path: PathBuf::new(),
            exclusions_path: None,
            provider: ProviderConfig::default(),
            depth: 2,
            budget: None,
            workers: 4,
            resolution: 1.0,
            rng_seed: 0,
            main_community_threshold: 0.01,
            weighted_symmetrize: false,
            top_k: 5,
            inter_citation_communities: 5,
            composition_level: LevelFilter::FirstLevelOnly,
            overlap_index: OverlapIndex::Dice,
            znorm_std: StdKind::Population,
            plot_data: false,
            export_formats: vec![ExportFormat::Graphml, ExportFormat::Edgelist],
            output_dir: PathBuf::from("citescope-out"),
        }
    }
}

/// Command-line settings that take precedence over the file and therefore
/// enter the config hash.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub rng_seed: Option<u64>,
    pub plot_data: bool,
    pub weighted_symmetrize: bool,
}

/// A validated configuration with its provenance hash.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: PipelineConfig,
    /// Hex SHA-256 of the raw file bytes and the applied overrides.
    pub hash: String,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: &str| Err(PipelineError::Config(m.to_string()));
        if self.seed_path.as_os_str().is_empty() {
            return fail("seed_path is required");
        }
        if !(1..=2).contains(&self.depth) {
            return fail("depth must be 1 or 2");
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return fail("resolution must be positive");
        }
        if !(self.main_community_threshold > 0.0 && self.main_community_threshold < 1.0) {
            return fail("main_community_threshold must lie in (0, 1)");
        }
        if self.budget == Some(0) {
            return fail("budget must be at least 1");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if self.inter_citation_communities == 0 {
            return fail("inter_citation_communities must be at least 1");
        }
        self.provider.validate().map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Resolves relative paths against `base`, the config file's directory.
    fn anchor(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.seed_path);
        fix(&mut self.output_dir);
        for p in [&mut self.exclusions_path, &mut self.provider.snapshot_path, &mut self.provider.cache_path]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }
}

/// Parses a config document; relative paths are taken relative to `base`.
pub fn parse_config(text: &str, base: &Path, overrides: &Overrides) -> Result<LoadedConfig, PipelineError> {
    let mut config: PipelineConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
    config.anchor(base);
    config.provider = config.provider.with_env();
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    if let Some(seed) = overrides.rng_seed {
        config.rng_seed = seed;
        hasher.update(format!("\n--seed={seed}").as_bytes());
    }
    if overrides.plot_data && !config.plot_data {
        config.plot_data = true;
        hasher.update(b"\n--plot-data");
    }
    if overrides.weighted_symmetrize && !config.weighted_symmetrize {
        config.weighted_symmetrize = true;
        hasher.update(b"\n--weighted-symmetrize");
    }
    config.validate()?;
    Ok(LoadedConfig {
        config,
        hash: hex::encode(hasher.finalize()),
    })
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<LoadedConfig, PipelineError> {
    let text =
        fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base, overrides)
}

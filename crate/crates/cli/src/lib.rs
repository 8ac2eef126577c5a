//! Resumable pipeline driving the citescope analysis from a config file:
//! ingest → crawl → component → core → symmetrize → louvain →
//! subcommunities → metrics → export.
//!
//! Every stage writes its artifacts under the output directory and records
//! their checksums, with those of its inputs, in `manifest.json`. A stage
//! whose inputs and outputs are unchanged is skipped on rerun.

pub mod config;
pub mod manifest;
pub mod pipeline;
mod report;

use std::path::Path;

use citescope_core::community::CommunityError;
use citescope_core::corpus::CorpusError;
use citescope_core::graph::GraphError;
use citescope_core::metrics::MetricsError;
use citescope_core::provider::ProviderError;
use thiserror::Error;

pub use config::{load_config, parse_config, ExportFormat, LoadedConfig, Overrides, PipelineConfig};
pub use manifest::{RunManifest, StageRecord};
pub use pipeline::{run_pipeline, stats, RunOptions, Stage};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("missing or stale input `{artifact}`: run {stage} first")]
    RunFirst { stage: &'static str, artifact: String },
    #[error("output directory was produced with config {recorded}, current config is {current}; use --force to start over")]
    ConfigChanged { recorded: String, current: String },
    #[error("output directory is locked by another run ({0}); remove the lock file if that run is dead")]
    Locked(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io { path: path.display().to_string(), source }
    }

    /// 1: usage or configuration, 2: data, 3: provider or transport.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_)
            | PipelineError::RunFirst { .. }
            | PipelineError::ConfigChanged { .. }
            | PipelineError::Locked(_) => 1,
            PipelineError::Provider(ProviderError::Config(_)) => 1,
            PipelineError::Provider(_) | PipelineError::Graph(GraphError::Provider(_)) => 3,
            _ => 2,
        }
    }
}

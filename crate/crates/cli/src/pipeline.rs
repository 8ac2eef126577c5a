use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use citescope_core::community::{
    community_size_distribution, louvain, louvain_weighted, main_communities, modularity_directed,
    modularity_undirected, modularity_weighted, sub_communities, CommunitySummary, LouvainConfig, Partition,
    WeightedGraph,
};
use citescope_core::corpus::{
    apply_exclusions, language_shares, parse_corpus, parse_corpus_json, parse_exclusions, Corpus, LanguageDetector,
};
use citescope_core::graph::io::{edges_tsv, nodes_tsv, read_snapshot, to_graphml};
use citescope_core::graph::{
    build_backward_network, chapter_subnetwork, completeness_fraction, induced_subgraph, largest_weak_component,
    prune_degree_one, symmetrize, CitationGraph, CrawlOptions, NodeSet,
};
use citescope_core::metrics::{
    composition_matrix, herfindahl_rows, inter_citation_matrix, jaccard_matrix, rank_size_fit,
    znormalize_columns_with, MetricsMatrix,
};
use citescope_core::provider::open_provider;
use log::{info, warn};

use crate::config::{ExportFormat, LoadedConfig, PipelineConfig};
use crate::manifest::{file_checksum, now, sha256_hex, write_atomic, RunManifest, StageRecord};
use crate::report::{header, json_num, json_object};
use crate::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Crawl,
    Component,
    Core,
    Symmetrize,
    Louvain,
    Subcommunities,
    Metrics,
    Export,
}

const CORPUS: &str = "corpus.tsv";
const SEEDS: &str = "seeds.tsv";
const PARTITION: &str = "partition.tsv";
const NETWORK: &str = "network";
const COMPONENT: &str = "component";
const CORE: &str = "core";
const SYMMETRIC: &str = "symmetric";
const LOCK_FILE: &str = ".citescope.lock";

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Ingest,
        Stage::Crawl,
        Stage::Component,
        Stage::Core,
        Stage::Symmetrize,
        Stage::Louvain,
        Stage::Subcommunities,
        Stage::Metrics,
        Stage::Export,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Crawl => "crawl",
            Stage::Component => "component",
            Stage::Core => "core",
            Stage::Symmetrize => "symmetrize",
            Stage::Louvain => "louvain",
            Stage::Subcommunities => "subcommunities",
            Stage::Metrics => "metrics",
            Stage::Export => "export",
        }
    }

    pub fn from_name(name: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Artifacts of earlier stages read by this one.
    fn inputs(self) -> Vec<String> {
        let graph = |dir: &str| vec![format!("{dir}/nodes.tsv"), format!("{dir}/edges.tsv")];
        let mut v = match self {
            Stage::Ingest => vec![],
            Stage::Crawl => vec![CORPUS.to_string()],
            Stage::Component => graph(NETWORK),
            Stage::Core => graph(COMPONENT),
            Stage::Symmetrize => graph(CORE),
            Stage::Louvain => [graph(CORE), graph(SYMMETRIC)].concat(),
            Stage::Subcommunities => [graph(SYMMETRIC), vec![PARTITION.into()]].concat(),
            Stage::Metrics => [vec![SEEDS.into()], graph(NETWORK), graph(CORE), vec![PARTITION.into()]].concat(),
            Stage::Export => [graph(CORE), vec![PARTITION.into()]].concat(),
        };
        v.sort_by_key(|rel| producer(rel));
        v
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn producer(rel: &str) -> Stage {
    match rel.split('/').next().unwrap_or(rel) {
        CORPUS => Stage::Ingest,
        SEEDS | NETWORK => Stage::Crawl,
        COMPONENT => Stage::Component,
        CORE => Stage::Core,
        SYMMETRIC => Stage::Symmetrize,
        _ => Stage::Louvain,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub stages: Vec<Stage>,
    /// Discard progress recorded under a different config.
    pub force: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { stages: Stage::ALL.to_vec(), force: false }
    }
}

/// Exclusive ownership of an output directory for the lifetime of a run.
struct Lock(PathBuf);

impl Lock {
    fn acquire(dir: &Path) -> Result<Self, PipelineError> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Lock(path))
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(PipelineError::Locked(path.display().to_string()))
            }
            Err(e) => Err(PipelineError::io(&path, e)),
        }
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

/// Runs the requested stages in pipeline order, skipping those whose inputs
/// and outputs are unchanged since they last completed.
pub fn run_pipeline(loaded: &LoadedConfig, options: &RunOptions) -> Result<RunManifest, PipelineError> {
    let cfg = &loaded.config;
    let out = cfg.output_dir.as_path();
    fs::create_dir_all(out).map_err(|e| PipelineError::io(out, e))?;
    let _lock = Lock::acquire(out)?;
    let mut manifest = match RunManifest::load(out)? {
        Some(m) if m.config_hash == loaded.hash => m,
        Some(m) if options.force => {
            warn!("config changed since the last run ({}); discarding recorded progress", m.config_hash);
            RunManifest::new(&loaded.hash)
        }
        Some(m) => {
            return Err(PipelineError::ConfigChanged { recorded: m.config_hash, current: loaded.hash.clone() });
        }
        None => RunManifest::new(&loaded.hash),
    };
    let ctx = Context { cfg, hash: &loaded.hash, out };
    let mut stages = options.stages.clone();
    stages.sort();
    stages.dedup();
    for stage in stages {
        let inputs = ctx.input_checksums(stage, &manifest)?;
        if let Some(record) = manifest.stages.get(stage.name()) {
            if record.inputs == inputs && manifest.artifacts_intact(stage.name(), out) {
                info!("{stage}: up to date");
                continue;
            }
        }
        info!("{stage}: running");
        let outputs = ctx.execute(stage)?;
        let mut artifacts = BTreeMap::new();
        for (rel, bytes) in &outputs {
            write_atomic(&out.join(rel), bytes)?;
            artifacts.insert(rel.clone(), sha256_hex(bytes));
        }
        if let Some(old) = manifest.stages.get(stage.name()) {
            for rel in old.artifacts.keys().filter(|r| !artifacts.contains_key(*r)) {
                let _ = fs::remove_file(out.join(rel));
            }
        }
        manifest.stages.insert(stage.name().to_string(), StageRecord { completed_at: now(), inputs, artifacts });
        manifest.save(out)?;
    }
    manifest.save(out)?;
    Ok(manifest)
}

type Outputs = Vec<(String, Vec<u8>)>;

struct Context<'a> {
    cfg: &'a PipelineConfig,
    hash: &'a str,
    out: &'a Path,
}

impl Context<'_> {
    fn input_checksums(&self, stage: Stage, manifest: &RunManifest) -> Result<BTreeMap<String, String>, PipelineError> {
        let mut sums = BTreeMap::new();
        if stage == Stage::Ingest {
            let external = std::iter::once(&self.cfg.seed_path).chain(self.cfg.exclusions_path.as_ref());
            for path in external {
                let sum = file_checksum(path)
                    .ok_or_else(|| PipelineError::Config(format!("cannot read {}", path.display())))?;
                sums.insert(path.display().to_string(), sum);
            }
            return Ok(sums);
        }
        if stage == Stage::Export {
            let formats: Vec<String> = self.cfg.export_formats.iter().map(|f| format!("{f:?}").to_lowercase()).collect();
            sums.insert("export_formats".into(), formats.join(","));
        }
        for rel in stage.inputs() {
            let from = producer(&rel);
            let recorded = manifest.stages.get(from.name()).and_then(|r| r.artifacts.get(&rel));
            match (recorded, file_checksum(&self.out.join(&rel))) {
                (Some(want), Some(got)) if *want == got => {
                    sums.insert(rel, got);
                }
                _ => return Err(PipelineError::RunFirst { stage: from.name(), artifact: rel }),
            }
        }
        Ok(sums)
    }

    fn execute(&self, stage: Stage) -> Result<Outputs, PipelineError> {
        match stage {
            Stage::Ingest => self.ingest(),
            Stage::Crawl => self.crawl(),
            Stage::Component => {
                let g = self.graph(NETWORK)?;
                Ok(self.graph_outputs(COMPONENT, &largest_weak_component(&g)?))
            }
            Stage::Core => {
                let core = prune_degree_one(&self.graph(COMPONENT)?);
                if core.is_empty() {
                    return Err(PipelineError::Data("the network has an empty 2-core".into()));
                }
                Ok(self.graph_outputs(CORE, &core))
            }
            Stage::Symmetrize => Ok(self.graph_outputs(SYMMETRIC, &symmetrize(&self.graph(CORE)?))),
            Stage::Louvain => self.louvain(),
            Stage::Subcommunities => self.subcommunities(),
            Stage::Metrics => self.metrics(),
            Stage::Export => self.export(),
        }
    }

    fn read(&self, rel: &str) -> Result<String, PipelineError> {
        let path = self.out.join(rel);
        fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))
    }

    fn graph(&self, dir: &str) -> Result<CitationGraph, PipelineError> {
        Ok(read_snapshot(&self.out.join(dir))?)
    }

    fn partition(&self) -> Result<Partition, PipelineError> {
        Ok(Partition::from_tsv(&self.read(PARTITION)?)?)
    }

    fn table(&self, body: &str) -> Vec<u8> {
        (header(self.hash) + body).into_bytes()
    }

    fn graph_outputs(&self, dir: &str, g: &CitationGraph) -> Outputs {
        vec![
            (format!("{dir}/nodes.tsv"), self.table(&nodes_tsv(g))),
            (format!("{dir}/edges.tsv"), self.table(&edges_tsv(g))),
        ]
    }

    fn louvain_config(&self) -> LouvainConfig {
        LouvainConfig::new(self.cfg.resolution, self.cfg.rng_seed)
    }

    fn ingest(&self) -> Result<Outputs, PipelineError> {
        let path = &self.cfg.seed_path;
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let mut corpus = if path.extension().is_some_and(|e| e == "json") {
            parse_corpus_json(&text)?
        } else {
            parse_corpus(&text)?
        };
        if let Some(ex) = &self.cfg.exclusions_path {
            let keys = parse_exclusions(&fs::read_to_string(ex).map_err(|e| PipelineError::io(ex, e))?);
            corpus = apply_exclusions(&corpus, &keys).corpus;
        }
        info!("{} references in {} chapters", corpus.len(), corpus.chapter_tags().len());
        Ok(vec![(CORPUS.into(), self.table(&corpus.to_tsv()))])
    }

    fn crawl(&self) -> Result<Outputs, PipelineError> {
        let corpus: Corpus = parse_corpus(&self.read(CORPUS)?)?;
        let provider = open_provider(&self.cfg.provider)?;
        let mut seeds_tsv = String::from("raw_key\tchapter_tag\tpaper_id\n");
        let mut seeds = Vec::new();
        let mut resolved = 0usize;
        for record in &corpus.records {
            let id = match provider.resolve(record) {
                Ok(paper) => {
                    resolved += 1;
                    let id = paper.id.clone();
                    seeds.push(paper);
                    id
                }
                Err(e) if e.is_not_found() => {
                    warn!("reference {} not found in the citation index", record.raw_key);
                    String::new()
                }
                Err(e) => return Err(e.into()),
            };
            for tag in &record.chapter_tags {
                let _ = writeln!(seeds_tsv, "{}\t{tag}\t{id}", record.raw_key);
            }
        }
        let options = CrawlOptions { depth: self.cfg.depth, budget: self.cfg.budget, workers: self.cfg.workers };
        let (g, stats) = build_backward_network(&seeds, provider.as_ref(), &options)?;
        let stats_json = json_object(&[
            ("references", corpus.len().to_string()),
            ("references_resolved", resolved.to_string()),
            ("seeds", stats.seeds_resolved.to_string()),
            ("nodes", g.node_count().to_string()),
            ("edges", g.edge_count().to_string()),
            ("nodes_depth_0", stats.nodes_by_depth[0].to_string()),
            ("nodes_depth_1", stats.nodes_by_depth[1].to_string()),
            ("nodes_depth_2", stats.nodes_by_depth[2].to_string()),
            ("requests_issued", stats.requests_issued.to_string()),
            ("budget_exhausted", stats.budget_exhausted.to_string()),
            ("completeness", json_num(stats.completeness)),
        ]);
        let mut outputs = vec![(SEEDS.into(), self.table(&seeds_tsv))];
        outputs.extend(self.graph_outputs(NETWORK, &g));
        outputs.push(("crawl_stats.json".into(), stats_json.into_bytes()));
        Ok(outputs)
    }

    /// Partition of the core, from its symmetrized view.
    fn detect(&self, core: &CitationGraph, sym: &CitationGraph) -> Result<(Partition, f64), PipelineError> {
        let config = self.louvain_config();
        if self.cfg.weighted_symmetrize {
            let weighted = WeightedGraph::from_graph(core);
            let labels = louvain_weighted(&weighted, &config)?;
            let p = Partition::from_labels(sym, &labels, config.rng_seed, config.resolution);
            let q = modularity_weighted(&weighted, &p.labels_for(sym)?, config.resolution)?;
            Ok((p, q))
        } else {
            let p = louvain(sym, &config)?;
            let q = modularity_undirected(sym, &p, config.resolution)?;
            Ok((p, q))
        }
    }

    fn summaries(&self, core: &CitationGraph, p: &Partition) -> Result<(Vec<CommunitySummary>, Vec<CommunitySummary>), PipelineError> {
        let all = community_size_distribution(core, p, self.cfg.top_k)?;
        let main = main_communities(&all, self.cfg.main_community_threshold);
        Ok((all, main))
    }

    fn louvain(&self) -> Result<Outputs, PipelineError> {
        let core = self.graph(CORE)?;
        let sym = self.graph(SYMMETRIC)?;
        let (p, undirected_q) = self.detect(&core, &sym)?;
        let directed_q = modularity_directed(&core, &p)?;
        let (all, main) = self.summaries(&core, &p)?;
        let main_labels: BTreeSet<u32> = main.iter().map(|s| s.label).collect();
        let mut table = String::from("label\tsize\trelative_size\tmain\ttop_members\n");
        for s in &all {
            let top: Vec<String> = s.top_degree_members.iter().map(|(id, d)| format!("{id} [{d}]")).collect();
            let _ = writeln!(
                table,
                "{}\t{}\t{}\t{}\t{}",
                s.label,
                s.size,
                json_num(s.relative_size),
                main_labels.contains(&s.label),
                top.join("; ")
            );
        }
        let summary = json_object(&[
            ("communities", p.community_count().to_string()),
            ("main_communities", main.len().to_string()),
            ("directed_modularity", json_num(directed_q)),
            ("undirected_modularity", json_num(undirected_q)),
            ("resolution", json_num(self.cfg.resolution)),
            ("rng_seed", self.cfg.rng_seed.to_string()),
            ("weighted", self.cfg.weighted_symmetrize.to_string()),
        ]);
        Ok(vec![
            (PARTITION.into(), self.table(&p.to_tsv())),
            ("communities.tsv".into(), self.table(&table)),
            ("modularity.json".into(), summary.into_bytes()),
        ])
    }

    fn subcommunities(&self) -> Result<Outputs, PipelineError> {
        let sym = self.graph(SYMMETRIC)?;
        let p = self.partition()?;
        let (_, main) = self.summaries(&sym, &p)?;
        let mut labels: Vec<u32> = main.iter().map(|s| s.label).collect();
        labels.sort_unstable();
        let mut members = String::from("community\tnode_id\tsub_community\n");
        let mut summary = String::from("community\tsize\tsub_communities\tmodularity\n");
        for label in labels {
            let sub = sub_communities(&sym, &p, label, &self.louvain_config())?;
            for (id, s) in sub.partition.assignment() {
                let _ = writeln!(members, "{label}\t{id}\t{s}");
            }
            let q = sub.modularity.map(json_num).unwrap_or_else(|| "NA".into());
            let _ = writeln!(summary, "{label}\t{}\t{}\t{q}", sub.partition.len(), sub.partition.community_count());
        }
        Ok(vec![
            ("subcommunities.tsv".into(), self.table(&members)),
            ("subcommunities_summary.tsv".into(), self.table(&summary)),
        ])
    }

    fn chapter_seeds(&self) -> Result<BTreeMap<String, BTreeSet<String>>, PipelineError> {
        let mut chapters: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let text = self.read(SEEDS)?;
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        lines.next();
        for line in lines {
            let fields: Vec<&str> = line.split('\t').collect();
            let (Some(tag), Some(id)) = (fields.get(1), fields.get(2)) else {
                return Err(PipelineError::Data(format!("{SEEDS}: malformed line `{line}`")));
            };
            let entry = chapters.entry(tag.to_string()).or_default();
            if !id.is_empty() {
                entry.insert(id.to_string());
            }
        }
        Ok(chapters)
    }

    fn matrix_outputs(&self, name: &str, m: &MetricsMatrix, outputs: &mut Outputs) {
        let h = format!("config_hash={}", self.hash);
        outputs.push((format!("metrics/{name}.csv"), m.to_csv(Some(&h)).into_bytes()));
        if self.cfg.plot_data {
            outputs.push((format!("metrics/{name}_long.tsv"), m.to_long_tsv(Some(&h)).into_bytes()));
        }
    }

    fn metrics(&self) -> Result<Outputs, PipelineError> {
        let net = self.graph(NETWORK)?;
        let core = self.graph(CORE)?;
        let p = self.partition()?;
        let (_, main) = self.summaries(&core, &p)?;
        let mut outputs = Outputs::new();

        let sizes: Vec<f64> = main.iter().map(|s| s.size as f64).collect();
        if sizes.len() >= 2 {
            let fit = rank_size_fit(&sizes)?;
            let json = json_object(&[
                ("communities", fit.n_points.to_string()),
                ("exponent", json_num(fit.exponent)),
                ("std_error", json_num(fit.std_error)),
                ("intercept", json_num(fit.intercept)),
                ("r2", json_num(fit.r2)),
                ("adjusted_r2", json_num(fit.adjusted_r2)),
            ]);
            outputs.push(("metrics/rank_size.json".into(), json.into_bytes()));
        } else {
            warn!("fewer than 2 main communities: no rank-size fit");
        }

        let top = self.cfg.inter_citation_communities.min(p.community_count()) as u32;
        let selected: Vec<u32> = (0..top).collect();
        self.matrix_outputs("inter_citation", &inter_citation_matrix(&core, &p, &selected)?, &mut outputs);

        let mut chapters_tsv =
            String::from("chapter\tseeds\tseeds_in_core\tnetwork_size\tnetwork_completeness\tcore_size\n");
        let mut core_sets = Vec::new();
        for (tag, seeds) in self.chapter_seeds()? {
            let in_net = NodeSet::new(&tag, seeds.iter().filter(|s| net.contains(s)).cloned());
            let (net_size, completeness) = if in_net.is_empty() {
                (0, json_num(1.0))
            } else {
                let sub = chapter_subnetwork(&net, &in_net)?;
                (sub.len(), json_num(completeness_fraction(&induced_subgraph(&net, &sub)?)?))
            };
            let in_core = NodeSet::new(&tag, seeds.iter().filter(|s| core.contains(s)).cloned());
            let core_sub = if in_core.is_empty() { None } else { Some(chapter_subnetwork(&core, &in_core)?) };
            let _ = writeln!(
                chapters_tsv,
                "{tag}\t{}\t{}\t{net_size}\t{completeness}\t{}",
                seeds.len(),
                in_core.len(),
                core_sub.as_ref().map_or(0, NodeSet::len)
            );
            match core_sub {
                Some(s) => core_sets.push(s),
                None => warn!("chapter {tag} has no seed in the core"),
            }
        }
        outputs.push(("metrics/chapter_subnetworks.tsv".into(), self.table(&chapters_tsv)));

        if core_sets.len() >= 2 {
            self.matrix_outputs("jaccard", &jaccard_matrix(&core_sets, self.cfg.overlap_index)?, &mut outputs);
        } else {
            warn!("fewer than 2 chapters in the core: no similarity matrix");
        }

        let counted: Vec<NodeSet> = core_sets
            .into_iter()
            .filter(|s| match composition_matrix(std::slice::from_ref(s), &core, &p, self.cfg.composition_level) {
                Ok(_) => true,
                Err(e) => {
                    warn!("chapter {} left out of the composition matrix: {e}", s.label);
                    false
                }
            })
            .collect();
        if !counted.is_empty() {
            let composition = composition_matrix(&counted, &core, &p, self.cfg.composition_level)?;
            self.matrix_outputs("composition", &composition, &mut outputs);
            if counted.len() >= 2 {
                let z = znormalize_columns_with(&composition, self.cfg.znorm_std)?;
                self.matrix_outputs("composition_znorm", &z, &mut outputs);
            }
            let mut h = String::from("chapter\therfindahl\n");
            for (tag, value) in herfindahl_rows(&composition)? {
                let _ = writeln!(h, "{tag}\t{}", json_num(value));
            }
            outputs.push(("metrics/herfindahl.tsv".into(), self.table(&h)));
        }

        let titles: Vec<&str> = (0..net.node_count()).filter_map(|i| net.attrs(i).title.as_deref()).collect();
        if !titles.is_empty() {
            let shares = language_shares(LanguageDetector::bundled(), &titles)?;
            let mut t = String::from("language\tshare\n");
            for (code, share) in shares {
                let _ = writeln!(t, "{code}\t{}", json_num(share));
            }
            outputs.push(("metrics/languages.tsv".into(), self.table(&t)));
        }
        Ok(outputs)
    }

    fn export(&self) -> Result<Outputs, PipelineError> {
        let core = self.graph(CORE)?;
        let p = self.partition()?;
        let labels = p.labels_for(&core)?;
        if p.len() != core.node_count() {
            return Err(PipelineError::Data("partition and core cover different node sets".into()));
        }
        let mut outputs = Outputs::new();
        for format in &self.cfg.export_formats {
            match format {
                ExportFormat::Graphml => {
                    let xml = to_graphml(&core, Some(&labels));
                    let (decl, rest) = xml.split_once('\n').unwrap_or((&xml, ""));
                    let text = format!("{decl}\n<!-- config_hash={} -->\n{rest}", self.hash);
                    outputs.push(("export/network.graphml".into(), text.into_bytes()));
                }
                ExportFormat::Edgelist => outputs.extend(self.graph_outputs("export", &core)),
            }
        }
        Ok(outputs)
    }
}

/// Human-readable summary of what an output directory holds.
pub fn stats(loaded: &LoadedConfig) -> Result<String, PipelineError> {
    let out = &loaded.config.output_dir;
    let manifest = RunManifest::load(out)?.ok_or_else(|| PipelineError::RunFirst {
        stage: Stage::Ingest.name(),
        artifact: crate::manifest::MANIFEST_FILE.into(),
    })?;
    let mut text = format!("output: {}\nconfig hash: {}\n", out.display(), manifest.config_hash);
    if manifest.config_hash != loaded.hash {
        text.push_str("warning: produced with a different config\n");
    }
    let done: Vec<&str> = Stage::ALL.iter().map(|s| s.name()).filter(|s| manifest.is_complete(s)).collect();
    let _ = writeln!(text, "completed stages: {}", done.join(", "));
    for (file, title) in [("crawl_stats.json", "crawl"), ("modularity.json", "communities")] {
        if let Ok(body) = fs::read_to_string(out.join(file)) {
            let _ = writeln!(text, "\n[{title}]\n{}", body.trim_end());
        }
    }
    if let Ok(body) = fs::read_to_string(out.join("communities.tsv")) {
        text.push_str("\n[community sizes]\n");
        for line in body.lines().filter(|l| !l.starts_with('#')) {
            let _ = writeln!(text, "{line}");
        }
    }
    Ok(text)
}

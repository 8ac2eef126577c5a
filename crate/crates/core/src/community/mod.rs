//! Community detection on citation graphs.

mod louvain;
mod modularity;

pub use louvain::{louvain, louvain_weighted, sub_communities, LouvainConfig, SubCommunities, WeightedGraph};
pub use modularity::{modularity_directed, modularity_undirected, modularity_weighted};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CitationGraph, NodeSet};

#[derive(Debug, Error, PartialEq)]
pub enum CommunityError {
    #[error("louvain requires an undirected graph; symmetrize first")]
    DirectedInput,
    #[error("directed modularity requires a directed graph")]
    UndirectedInput,
    #[error("resolution must be positive, got {0}")]
    InvalidResolution(f64),
    #[error("graph is empty")]
    EmptyGraph,
    #[error("modularity undefined on empty graph")]
    NoEdges,
    #[error("unknown community label {0}")]
    UnknownLabel(u32),
    #[error("partition does not cover node `{0}`")]
    Uncovered(String),
    #[error("partition line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Assignment of node ids to dense community labels `0..k`.
///
/// Labels are canonical: label 0 is the largest community, ties broken by
/// the smallest member id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    members: Vec<String>,
    labels: Vec<u32>,
    pub rng_seed: u64,
    pub resolution: f64,
}

impl Partition {
    /// Partition of the nodes of `g` from per-node labels of any numbering.
    pub fn from_labels(g: &CitationGraph, labels: &[u32], rng_seed: u64, resolution: f64) -> Self {
        assert_eq!(labels.len(), g.node_count(), "one label per node");
        Partition {
            members: g.ids().to_vec(),
            labels: canonical_labels(labels),
            rng_seed,
            resolution,
        }
    }

    /// Builds a partition from `(id, label)` pairs in any order.
    pub fn from_assignment<I>(pairs: I, rng_seed: u64, resolution: f64) -> Result<Self, CommunityError>
    where
        I: IntoIterator<Item = (String, u32)>,
    {
        let mut pairs: Vec<(String, u32)> = pairs.into_iter().collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(CommunityError::Parse {
                line: 0,
                message: format!("node `{}` assigned twice", w[0].0),
            });
        }
        let (members, raw): (Vec<String>, Vec<u32>) = pairs.into_iter().unzip();
        Ok(Partition {
            members,
            labels: canonical_labels(&raw),
            rng_seed,
            resolution,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn community_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn label_of(&self, id: &str) -> Option<u32> {
        self.members
            .binary_search_by(|m| m.as_str().cmp(id))
            .ok()
            .map(|i| self.labels[i])
    }

    /// `(id, label)` pairs in id order.
    pub fn assignment(&self) -> impl Iterator<Item = (&str, u32)> {
        self.members.iter().map(String::as_str).zip(self.labels.iter().copied())
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.community_count()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    pub fn members_of(&self, label: u32) -> Result<NodeSet, CommunityError> {
        if label as usize >= self.community_count() {
            return Err(CommunityError::UnknownLabel(label));
        }
        Ok(NodeSet {
            label: label.to_string(),
            members: self
                .assignment()
                .filter(|&(_, l)| l == label)
                .map(|(id, _)| id.to_string())
                .collect(),
        })
    }

    /// Label of every node of `g`, in node-index order.
    pub fn labels_for(&self, g: &CitationGraph) -> Result<Vec<u32>, CommunityError> {
        if self.members == g.ids() {
            return Ok(self.labels.clone());
        }
        g.ids()
            .iter()
            .map(|id| self.label_of(id).ok_or_else(|| CommunityError::Uncovered(id.clone())))
            .collect()
    }

    /// TSV with a `node_id	community_label` header.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# resolution={} rng_seed={}\nnode_id\tcommunity_label\n", self.resolution, self.rng_seed);
        for (id, label) in self.assignment() {
            let _ = writeln!(out, "{id}\t{label}");
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self, CommunityError> {
        let (mut resolution, mut rng_seed) = (1.0, 0u64);
        let mut pairs = Vec::new();
        let mut header_seen = false;
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = line.trim_end_matches('\r');
            if let Some(comment) = line.strip_prefix('#') {
                for kv in comment.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("resolution", v)) => resolution = v.parse().unwrap_or(resolution),
                        Some(("rng_seed", v)) => rng_seed = v.parse().unwrap_or(rng_seed),
                        _ => {}
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !header_seen {
                if line.trim() != "node_id\tcommunity_label" {
                    return Err(CommunityError::Parse {
                        line: line_no,
                        message: "expected header `node_id\\tcommunity_label`".into(),
                    });
                }
                header_seen = true;
                continue;
            }
            let (id, label) = line.split_once('\t').ok_or_else(|| CommunityError::Parse {
                line: line_no,
                message: "expected two tab-separated fields".into(),
            })?;
            let label = label.trim().parse::<u32>().map_err(|_| CommunityError::Parse {
                line: line_no,
                message: format!("invalid label `{label}`"),
            })?;
            pairs.push((id.trim().to_string(), label));
        }
        if pairs.is_empty() {
            return Err(CommunityError::Parse {
                line: 0,
                message: "empty partition".into(),
            });
        }
        Self::from_assignment(pairs, rng_seed, resolution)
    }
}

/// Relabels so that label 0 is the largest community; equal sizes are
/// ordered by first occurrence.
fn canonical_labels(raw: &[u32]) -> Vec<u32> {
    let mut first_seen: Vec<(u32, usize, usize)> = Vec::new(); // (raw, first index, size)
    let mut slot: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
    for (i, &l) in raw.iter().enumerate() {
        let s = *slot.entry(l).or_insert_with(|| {
            first_seen.push((l, i, 0));
            first_seen.len() - 1
        });
        first_seen[s].2 += 1;
    }
    let mut order: Vec<usize> = (0..first_seen.len()).collect();
    order.sort_by(|&a, &b| first_seen[b].2.cmp(&first_seen[a].2).then(first_seen[a].1.cmp(&first_seen[b].1)));
    let mut new_label = vec![0u32; first_seen.len()];
    for (rank, &s) in order.iter().enumerate() {
        new_label[s] = rank as u32;
    }
    raw.iter().map(|l| new_label[slot[l]]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySummary {
    pub label: u32,
    pub size: usize,
    pub relative_size: f64,
    /// Highest-degree members with their degree in the summarized graph.
    pub top_degree_members: Vec<(String, usize)>,
}

/// Summaries sorted by decreasing size (then label).
pub fn community_size_distribution(
    g: &CitationGraph,
    p: &Partition,
    top_k: usize,
) -> Result<Vec<CommunitySummary>, CommunityError> {
    if p.is_empty() {
        return Err(CommunityError::EmptyGraph);
    }
    let labels = p.labels_for(g)?;
    let sizes = p.sizes();
    let total = p.len() as f64;
    let mut top: Vec<Vec<(usize, usize)>> = vec![Vec::new(); sizes.len()];
    for (i, &l) in labels.iter().enumerate() {
        top[l as usize].push((g.degree(i), i));
    }
    let mut out: Vec<CommunitySummary> = sizes
        .iter()
        .enumerate()
        .map(|(label, &size)| {
            let members = &mut top[label];
            members.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            CommunitySummary {
                label: label as u32,
                size,
                relative_size: size as f64 / total,
                top_degree_members: members
                    .iter()
                    .take(top_k)
                    .map(|&(d, i)| (g.id(i).to_string(), d))
                    .collect(),
            }
        })
        .collect();
    out.sort_by(|a, b| b.size.cmp(&a.size).then(a.label.cmp(&b.label)));
    Ok(out)
}

/// Drops the smallest communities whose cumulated relative size stays below
/// `threshold`; the rest are the "main" communities, largest first.
pub fn main_communities(summaries: &[CommunitySummary], threshold: f64) -> Vec<CommunitySummary> {
    let mut sorted = summaries.to_vec();
    sorted.sort_by(|a, b| b.size.cmp(&a.size).then(a.label.cmp(&b.label)));
    let mut cumulated = 0.0;
    let mut keep = sorted.len();
    for s in sorted.iter().rev() {
        cumulated += s.relative_size;
        if cumulated >= threshold {
            break;
        }
        keep -= 1;
    }
    sorted.truncate(keep);
    sorted
}

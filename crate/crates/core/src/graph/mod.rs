//! Citation graph storage and structural transforms.
//!
//! A [`CitationGraph`] is immutable once built. Node ids are kept sorted, so
//! node indices, edge order and every derived output are deterministic. An
//! edge `u -> v` means "u cites v". Undirected graphs (from [`symmetrize`])
//! store each edge once as `(min, max)`.

mod crawl;
pub mod io;

pub use crawl::{build_backward_network, CrawlOptions, CrawlStats};

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::provider::ProviderError;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph is empty")]
    Empty,
    #[error("node `{0}` is not in the graph")]
    UnknownNode(String),
    #[error("crawl depth must be 1 or 2, got {0}")]
    InvalidDepth(u8),
    #[error("request budget must be positive")]
    InvalidBudget,
    #[error("no resolvable seeds")]
    NoSeeds,
    #[error("operation requires a directed graph")]
    NotDirected,
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// Per-node crawl metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeAttrs {
    /// 0 for seeds, 1 for their citers, 2 for citers of citers.
    pub depth: u8,
    /// Every entering link of this node was retrieved.
    pub fully_resolved: bool,
    pub title: Option<String>,
    pub year: Option<i32>,
}

impl Default for NodeAttrs {
    fn default() -> Self {
        NodeAttrs {
            depth: 2,
            fully_resolved: false,
            title: None,
            year: None,
        }
    }
}

/// A labeled set of node ids, such as the subnetwork of one chapter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSet {
    pub label: String,
    pub members: BTreeSet<String>,
}

impl NodeSet {
    pub fn new<I, S>(label: &str, members: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        NodeSet {
            label: label.to_string(),
            members: members.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Accumulates nodes and edges in any order; [`GraphBuilder::build`] sorts
/// and deduplicates them.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: HashMap<String, NodeAttrs>,
    edges: Vec<(String, String)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node, or merges attributes into an existing one: the smallest
    /// depth wins, resolution flags are or-ed, missing metadata is filled.
    pub fn add_node(&mut self, id: &str, attrs: NodeAttrs) {
        match self.nodes.get_mut(id) {
            Some(existing) => {
                existing.depth = existing.depth.min(attrs.depth);
                existing.fully_resolved |= attrs.fully_resolved;
                if existing.title.is_none() {
                    existing.title = attrs.title;
                }
                if existing.year.is_none() {
                    existing.year = attrs.year;
                }
            }
            None => {
                self.nodes.insert(id.to_string(), attrs);
            }
        }
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn node_mut(&mut self, id: &str) -> Option<&mut NodeAttrs> {
        self.nodes.get_mut(id)
    }

    /// Adds `citing -> cited`. Missing endpoints are created with default
    /// attributes; a self-citation adds the node but no edge.
    pub fn add_edge(&mut self, citing: &str, cited: &str) {
        for id in [citing, cited] {
            if !self.nodes.contains_key(id) {
                self.nodes.insert(id.to_string(), NodeAttrs::default());
            }
        }
        if citing == cited {
            return;
        }
        self.edges.push((citing.to_string(), cited.to_string()));
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Graph of the current contents, leaving the builder usable.
    pub(crate) fn snapshot(&self) -> CitationGraph {
        GraphBuilder {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        }
        .build()
    }

    pub fn build(self) -> CitationGraph {
        self.finish(true)
    }

    /// Builds an undirected graph; edge orientation is discarded.
    pub fn build_undirected(self) -> CitationGraph {
        self.finish(false)
    }

    fn finish(self, directed: bool) -> CitationGraph {
        let mut nodes: Vec<(String, NodeAttrs)> = self.nodes.into_iter().collect();
        nodes.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let (ids, attrs): (Vec<String>, Vec<NodeAttrs>) = nodes.into_iter().unzip();
        let index: HashMap<&str, u32> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i as u32))
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|(u, v)| (index[u.as_str()], index[v.as_str()]))
            .collect();
        drop(index);
        CitationGraph::from_parts(ids, attrs, edges, directed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CitationGraph {
    ids: Vec<String>,
    attrs: Vec<NodeAttrs>,
    edges: Vec<(u32, u32)>,
    directed: bool,
    // Directed: successors (cited papers). Undirected: all neighbours.
    out_offsets: Vec<u32>,
    out_targets: Vec<u32>,
    // Directed only: predecessors (citing papers).
    in_offsets: Vec<u32>,
    in_sources: Vec<u32>,
}

impl CitationGraph {
    /// `ids` must be sorted and unique; edges index into them. Edges are
    /// normalized (self-loops dropped, deduplicated, sorted).
    pub(crate) fn from_parts(
        ids: Vec<String>,
        attrs: Vec<NodeAttrs>,
        mut edges: Vec<(u32, u32)>,
        directed: bool,
    ) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(ids.len(), attrs.len());
        edges.retain(|(u, v)| u != v);
        if !directed {
            for e in edges.iter_mut() {
                if e.0 > e.1 {
                    *e = (e.1, e.0);
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();

        let n = ids.len();
        let (out_offsets, out_targets, in_offsets, in_sources) = if directed {
            let (oo, ot) = csr(n, edges.iter().map(|&(u, v)| (u, v)));
            let (io, is) = csr(n, edges.iter().map(|&(u, v)| (v, u)));
            (oo, ot, io, is)
        } else {
            let (oo, ot) = csr(n, edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]));
            (oo, ot, Vec::new(), Vec::new())
        };
        CitationGraph {
            ids,
            attrs,
            edges,
            directed,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
        }
    }

    pub fn empty(directed: bool) -> Self {
        Self::from_parts(Vec::new(), Vec::new(), Vec::new(), directed)
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Sorted node ids; position is the node index.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn attrs(&self, index: usize) -> &NodeAttrs {
        &self.attrs[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.binary_search_by(|probe| probe.as_str().cmp(id)).ok()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index_of(id).is_some()
    }

    /// Sorted edges as index pairs.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Directed: papers cited by `i`. Undirected: all neighbours of `i`.
    pub fn out_neighbors(&self, i: usize) -> &[u32] {
        &self.out_targets[self.out_offsets[i] as usize..self.out_offsets[i + 1] as usize]
    }

    /// Directed: papers citing `i`. Undirected: all neighbours of `i`.
    pub fn in_neighbors(&self, i: usize) -> &[u32] {
        if self.directed {
            &self.in_sources[self.in_offsets[i] as usize..self.in_offsets[i + 1] as usize]
        } else {
            self.out_neighbors(i)
        }
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_neighbors(i).len()
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_neighbors(i).len()
    }

    /// In + out degree for directed graphs, neighbour count otherwise.
    pub fn degree(&self, i: usize) -> usize {
        if self.directed {
            self.out_degree(i) + self.in_degree(i)
        } else {
            self.out_degree(i)
        }
    }

    /// Nodes of this graph that belong to `set`, as indices.
    pub fn indices_of(&self, set: &NodeSet) -> Result<Vec<usize>, GraphError> {
        set.members
            .iter()
            .map(|m| self.index_of(m).ok_or_else(|| GraphError::UnknownNode(m.clone())))
            .collect()
    }

    /// Induced subgraph on a sorted list of node indices.
    pub(crate) fn subgraph_by_index(&self, keep: &[usize]) -> CitationGraph {
        let mut remap = vec![u32::MAX; self.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new as u32;
        }
        let ids = keep.iter().map(|&i| self.ids[i].clone()).collect();
        let attrs = keep.iter().map(|&i| self.attrs[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|&(u, v)| {
                let (a, b) = (remap[u as usize], remap[v as usize]);
                (a != u32::MAX && b != u32::MAX).then_some((a, b))
            })
            .collect();
        CitationGraph::from_parts(ids, attrs, edges, self.directed)
    }

    pub fn to_node_set(&self, label: &str) -> NodeSet {
        NodeSet::new(label, self.ids.iter().cloned())
    }
}

fn csr(n: usize, pairs: impl Iterator<Item = (u32, u32)> + Clone) -> (Vec<u32>, Vec<u32>) {
    let mut offsets = vec![0u32; n + 1];
    for (u, _) in pairs.clone() {
        offsets[u as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut targets = vec![0u32; offsets[n] as usize];
    for (u, v) in pairs {
        targets[cursor[u as usize] as usize] = v;
        cursor[u as usize] += 1;
    }
    for i in 0..n {
        targets[offsets[i] as usize..offsets[i + 1] as usize].sort_unstable();
    }
    (offsets, targets)
}

/// Share of nodes with positive in-degree whose entering links were all
/// retrieved. 1.0 when no node has a positive in-degree.
pub fn completeness_fraction(g: &CitationGraph) -> Result<f64, GraphError> {
    if g.is_empty() {
        return Err(GraphError::Empty);
    }
    let (mut cited, mut resolved) = (0usize, 0usize);
    for i in 0..g.node_count() {
        if g.in_degree(i) > 0 {
            cited += 1;
            if g.attrs(i).fully_resolved {
                resolved += 1;
            }
        }
    }
    Ok(if cited == 0 {
        1.0
    } else {
        resolved as f64 / cited as f64
    })
}

struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }
}

/// Weak component label per node, labels numbered by smallest member.
pub fn weak_components(g: &CitationGraph) -> Vec<usize> {
    let mut sets = DisjointSets::new(g.node_count());
    for &(u, v) in g.edges() {
        sets.union(u, v);
    }
    let mut label_of_root = HashMap::new();
    (0..g.node_count() as u32)
        .map(|i| {
            let root = sets.find(i);
            let next = label_of_root.len();
            *label_of_root.entry(root).or_insert(next)
        })
        .collect()
}

/// Induced subgraph on the largest weakly connected component. Among equally
/// large components the one holding the smallest node id wins.
pub fn largest_weak_component(g: &CitationGraph) -> Result<CitationGraph, GraphError> {
    if g.is_empty() {
        return Err(GraphError::Empty);
    }
    let labels = weak_components(g);
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        sizes[l] += 1;
    }
    // Labels are numbered in order of first (smallest) member, so the first
    // maximum is the tie-break winner.
    let best = (0..count).fold(0, |best, l| if sizes[l] > sizes[best] { l } else { best });
    if sizes[best] == g.node_count() {
        return Ok(g.clone());
    }
    let keep: Vec<usize> = (0..g.node_count()).filter(|&i| labels[i] == best).collect();
    Ok(g.subgraph_by_index(&keep))
}

/// Repeatedly deletes nodes of total degree at most one. The result is the
/// 2-core and may be empty.
pub fn prune_degree_one(g: &CitationGraph) -> CitationGraph {
    let n = g.node_count();
    let mut degree: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let mut removed = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| degree[i] <= 1).collect();
    for &i in &queue {
        removed[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        let neighbours = if g.is_directed() {
            [g.out_neighbors(i), g.in_neighbors(i)]
        } else {
            [g.out_neighbors(i), &[][..]]
        };
        for &j in neighbours.into_iter().flatten() {
            let j = j as usize;
            if removed[j] {
                continue;
            }
            degree[j] -= 1;
            if degree[j] <= 1 {
                removed[j] = true;
                queue.push_back(j);
            }
        }
    }
    if !removed.contains(&true) {
        return g.clone();
    }
    let keep: Vec<usize> = (0..n).filter(|&i| !removed[i]).collect();
    g.subgraph_by_index(&keep)
}

/// Undirected simple view: `{u, v}` is an edge iff `u -> v` or `v -> u`.
pub fn symmetrize(g: &CitationGraph) -> CitationGraph {
    CitationGraph::from_parts(g.ids.clone(), g.attrs.clone(), g.edges.clone(), false)
}

/// Every node that reaches a seed by following citations, seeds included.
pub fn chapter_subnetwork(g: &CitationGraph, seeds: &NodeSet) -> Result<NodeSet, GraphError> {
    let start = g.indices_of(seeds)?;
    let mut seen = vec![false; g.node_count()];
    let mut queue = VecDeque::new();
    for i in start {
        if !seen[i] {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        for &j in g.in_neighbors(i) {
            if !seen[j as usize] {
                seen[j as usize] = true;
                queue.push_back(j as usize);
            }
        }
    }
    Ok(NodeSet {
        label: seeds.label.clone(),
        members: (0..g.node_count())
            .filter(|&i| seen[i])
            .map(|i| g.id(i).to_string())
            .collect(),
    })
}

pub fn induced_subgraph(g: &CitationGraph, nodes: &NodeSet) -> Result<CitationGraph, GraphError> {
    let mut keep = g.indices_of(nodes)?;
    keep.sort_unstable();
    Ok(g.subgraph_by_index(&keep))
}

//! Louvain modularity optimization: local moving followed by aggregation,
//! repeated until a level moves no node.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{modularity_undirected, CommunityError, Partition};
use crate::graph::{induced_subgraph, symmetrize, CitationGraph};

/// Undirected weighted graph in compressed adjacency form. Self-loops are
/// kept apart and count twice toward a node's strength.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    self_loops: Vec<f64>,
    strength: Vec<f64>,
    total: f64,
}

impl WeightedGraph {
    /// Undirected view of `g` with one unit of weight per edge. On a directed
    /// graph a reciprocal pair of citations becomes one edge of weight 2.
    pub fn from_graph(g: &CitationGraph) -> Self {
        let edges = g.edges().iter().map(|&(u, v)| (u.min(v), u.max(v), 1.0));
        Self::from_edges(g.node_count(), edges)
    }

    /// Builds from `(u, v, w)` triples; parallel edges are summed, `u == v`
    /// adds a self-loop.
    pub fn from_edges(n: usize, edges: impl Iterator<Item = (u32, u32, f64)>) -> Self {
        let mut self_loops = vec![0.0; n];
        let mut arcs: Vec<(u32, u32, f64)> = Vec::new();
        for (u, v, w) in edges {
            if u == v {
                self_loops[u as usize] += w;
            } else {
                arcs.push((u, v, w));
                arcs.push((v, u, w));
            }
        }
        Self::from_arcs(n, arcs, self_loops)
    }

    fn from_arcs(n: usize, mut arcs: Vec<(u32, u32, f64)>, self_loops: Vec<f64>) -> Self {
        arcs.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::with_capacity(arcs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(arcs.len());
        let mut last: Option<(u32, u32)> = None;
        for (u, v, w) in arcs {
            if last == Some((u, v)) {
                *weights.last_mut().expect("merged arc") += w;
                continue;
            }
            last = Some((u, v));
            offsets[u as usize + 1] += 1;
            targets.push(v);
            weights.push(w);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let strength: Vec<f64> = (0..n)
            .map(|i| weights[offsets[i]..offsets[i + 1]].iter().sum::<f64>() + 2.0 * self_loops[i])
            .collect();
        let total = strength.iter().sum();
        WeightedGraph {
            offsets,
            targets,
            weights,
            self_loops,
            strength,
            total,
        }
    }

    pub fn node_count(&self) -> usize {
        self.strength.len()
    }

    /// Sum of all strengths, i.e. twice the total edge weight.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn strength(&self, i: usize) -> f64 {
        self.strength[i]
    }

    pub fn self_loop(&self, i: usize) -> f64 {
        self.self_loops[i]
    }

    /// Neighbours of `i` other than itself, with edge weights.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(|(&j, &w)| (j as usize, w))
    }

    /// One node per community; intra-community weight becomes a self-loop.
    fn aggregate(&self, community: &[u32], count: usize) -> WeightedGraph {
        let mut self_loops = vec![0.0; count];
        let mut arcs = Vec::new();
        for i in 0..self.node_count() {
            let ci = community[i];
            self_loops[ci as usize] += self.self_loops[i];
            for (j, w) in self.neighbors(i) {
                let cj = community[j];
                if ci == cj {
                    // Each internal edge is seen from both ends.
                    self_loops[ci as usize] += w / 2.0;
                } else {
                    arcs.push((ci, cj, w));
                }
            }
        }
        WeightedGraph::from_arcs(count, arcs, self_loops)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LouvainConfig {
    pub resolution: f64,
    pub rng_seed: u64,
    /// A level stops once a full pass gains less modularity than this.
    pub min_gain: f64,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            resolution: 1.0,
            rng_seed: 0,
            min_gain: 1e-7,
        }
    }
}

impl LouvainConfig {
    pub fn new(resolution: f64, rng_seed: u64) -> Self {
        LouvainConfig {
            resolution,
            rng_seed,
            ..Default::default()
        }
    }
}

/// Local moving on one level. Returns community ids (not dense) and whether
/// any node changed community.
fn move_nodes(g: &WeightedGraph, config: &LouvainConfig, rng: &mut ChaCha8Rng) -> (Vec<u32>, bool) {
    let n = g.node_count();
    let mut community: Vec<u32> = (0..n as u32).collect();
    if g.total_weight() <= 0.0 {
        return (community, false);
    }
    let two_m = g.total_weight();
    let mut total: Vec<f64> = (0..n).map(|i| g.strength(i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut link = vec![0.0f64; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    loop {
        let mut pass_gain = 0.0;
        let mut moves = 0usize;
        for &i in &order {
            let own = community[i] as usize;
            let k_i = g.strength(i);
            for (j, w) in g.neighbors(i) {
                let c = community[j] as usize;
                if link[c] == 0.0 {
                    touched.push(c);
                }
                link[c] += w;
            }
            total[own] -= k_i;
            let gain = |c: usize, link: &[f64], total: &[f64]| link[c] - config.resolution * total[c] * k_i / two_m;
            let stay = gain(own, &link, &total);
            let (mut best, mut best_gain) = (own, stay);
            // Strict improvement only: on ties the node stays.
            for &c in &touched {
                let candidate = gain(c, &link, &total);
                if candidate > best_gain {
                    best = c;
                    best_gain = candidate;
                }
            }
            total[best] += k_i;
            if best != own {
                community[i] = best as u32;
                moves += 1;
                pass_gain += 2.0 * (best_gain - stay) / two_m;
            }
            for &c in &touched {
                link[c] = 0.0;
            }
            touched.clear();
        }
        any_move |= moves > 0;
        if moves == 0 || pass_gain < config.min_gain {
            break;
        }
    }
    (community, any_move)
}

/// Renumbers labels densely in order of first appearance.
fn densify(labels: &mut [u32]) -> usize {
    let mut map = vec![u32::MAX; labels.len()];
    let mut next = 0u32;
    for l in labels.iter_mut() {
        let slot = &mut map[*l as usize];
        if *slot == u32::MAX {
            *slot = next;
            next += 1;
        }
        *l = *slot;
    }
    next as usize
}

/// Louvain on a weighted graph; returns one label per node.
pub fn louvain_weighted(g: &WeightedGraph, config: &LouvainConfig) -> Result<Vec<u32>, CommunityError> {
    if !(config.resolution > 0.0 && config.resolution.is_finite()) {
        return Err(CommunityError::InvalidResolution(config.resolution));
    }
    if g.node_count() == 0 {
        return Err(CommunityError::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut assignment: Vec<u32> = (0..g.node_count() as u32).collect();
    let mut level = g.clone();
    loop {
        let (mut community, moved) = move_nodes(&level, config, &mut rng);
        if !moved {
            break;
        }
        let count = densify(&mut community);
        for a in assignment.iter_mut() {
            *a = community[*a as usize];
        }
        if count == level.node_count() {
            break;
        }
        level = level.aggregate(&community, count);
    }
    Ok(assignment)
}

/// Louvain on an undirected citation graph with unit weights.
pub fn louvain(g: &CitationGraph, config: &LouvainConfig) -> Result<Partition, CommunityError> {
    if g.is_directed() {
        return Err(CommunityError::DirectedInput);
    }
    let labels = louvain_weighted(&WeightedGraph::from_graph(g), config)?;
    Ok(Partition::from_labels(g, &labels, config.rng_seed, config.resolution))
}

/// Second-level detection inside one community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCommunities {
    pub label: u32,
    pub partition: Partition,
    /// Modularity of the internal partition; `None` when the community has
    /// no internal edge.
    pub modularity: Option<f64>,
}

/// Runs Louvain on the undirected subgraph induced by community `label`.
pub fn sub_communities(
    g: &CitationGraph,
    p: &Partition,
    label: u32,
    config: &LouvainConfig,
) -> Result<SubCommunities, CommunityError> {
    let members = p.members_of(label)?;
    let undirected = if g.is_directed() { symmetrize(g) } else { g.clone() };
    let sub = induced_subgraph(&undirected, &members).map_err(|e| match e {
        crate::graph::GraphError::UnknownNode(id) => CommunityError::Uncovered(id),
        _ => CommunityError::EmptyGraph,
    })?;
    let partition = louvain(&sub, config)?;
    let modularity = match modularity_undirected(&sub, &partition, config.resolution) {
        Ok(q) => Some(q),
        Err(CommunityError::NoEdges) => None,
        Err(e) => return Err(e),
    };
    Ok(SubCommunities {
        label,
        partition,
        modularity,
    })
}

use super::{CommunityError, Partition, WeightedGraph};
use crate::graph::CitationGraph;

/// Newman-Girvan modularity with resolution `γ`:
/// `Q = Σ_c [ e_c / m - γ (d_c / 2m)² ]`.
pub fn modularity_undirected(g: &CitationGraph, p: &Partition, resolution: f64) -> Result<f64, CommunityError> {
    if g.is_directed() {
        return Err(CommunityError::DirectedInput);
    }
    let labels = p.labels_for(g)?;
    let m = g.edge_count();
    if m == 0 {
        return Err(CommunityError::NoEdges);
    }
    let k = p.community_count();
    let mut internal = vec![0usize; k];
    let mut degree = vec![0usize; k];
    for &(u, v) in g.edges() {
        let (cu, cv) = (labels[u as usize] as usize, labels[v as usize] as usize);
        if cu == cv {
            internal[cu] += 1;
        }
        degree[cu] += 1;
        degree[cv] += 1;
    }
    let m = m as f64;
    Ok((0..k)
        .map(|c| {
            let share = degree[c] as f64 / (2.0 * m);
            internal[c] as f64 / m - resolution * share * share
        })
        .sum())
}

/// Leicht-Newman directed modularity:
/// `Q = (1/m) Σ_c [ e_c - out_c · in_c / m ]`, where `e_c` counts arcs
/// inside `c` and `out_c`, `in_c` are summed out- and in-degrees.
pub fn modularity_directed(g: &CitationGraph, p: &Partition) -> Result<f64, CommunityError> {
    if !g.is_directed() {
        return Err(CommunityError::UndirectedInput);
    }
    let labels = p.labels_for(g)?;
    let m = g.edge_count();
    if m == 0 {
        return Err(CommunityError::NoEdges);
    }
    let k = p.community_count();
    let mut internal = vec![0usize; k];
    let mut out_deg = vec![0usize; k];
    let mut in_deg = vec![0usize; k];
    for &(u, v) in g.edges() {
        let (cu, cv) = (labels[u as usize] as usize, labels[v as usize] as usize);
        if cu == cv {
            internal[cu] += 1;
        }
        out_deg[cu] += 1;
        in_deg[cv] += 1;
    }
    let m = m as f64;
    Ok((0..k)
        .map(|c| (internal[c] as f64 - out_deg[c] as f64 * in_deg[c] as f64 / m) / m)
        .sum())
}

/// Modularity of per-node labels on a weighted graph, self-loops included.
pub fn modularity_weighted(g: &WeightedGraph, labels: &[u32], resolution: f64) -> Result<f64, CommunityError> {
    let two_m = g.total_weight();
    if two_m <= 0.0 {
        return Err(CommunityError::NoEdges);
    }
    let k = labels.iter().max().map_or(0, |&l| l as usize + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for i in 0..g.node_count() {
        let c = labels[i] as usize;
        degree[c] += g.strength(i);
        internal[c] += 2.0 * g.self_loop(i);
        for (j, w) in g.neighbors(i) {
            if labels[j] as usize == c {
                internal[c] += w;
            }
        }
    }
    Ok((0..k)
        .map(|c| internal[c] / two_m - resolution * (degree[c] / two_m).powi(2))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{symmetrize, tests::directed, CitationGraph};

    fn labels_partition(g: &CitationGraph, labels: &[u32]) -> Partition {
        Partition::from_labels(g, labels, 0, 1.0)
    }

    fn two_triangles() -> CitationGraph {
        directed(&[("a", "b"), ("b", "c"), ("c", "a"), ("d", "e"), ("e", "f"), ("f", "d")])
    }

    #[test]
    fn one_community_is_zero() {
        let g = two_triangles();
        let p = labels_partition(&g, &[0; 6]);
        assert_eq!(modularity_directed(&g, &p).unwrap(), 0.0);
        let u = symmetrize(&g);
        assert_eq!(modularity_undirected(&u, &p, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_triangles_and_cycles() {
        let g = two_triangles();
        let p = labels_partition(&g, &[0, 0, 0, 1, 1, 1]);
        assert_eq!(modularity_directed(&g, &p).unwrap(), 0.5);
        assert_eq!(modularity_undirected(&symmetrize(&g), &p, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn cliques_joined_by_bridge() {
        let mut edges = Vec::new();
        let names = ["a", "b", "c", "d", "e", "f", "g", "h"];
        for block in [&names[..4], &names[4..]] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((block[i], block[j]));
                }
            }
        }
        edges.push(("d", "e"));
        let g = symmetrize(&directed(&edges));
        let p = labels_partition(&g, &[0, 0, 0, 0, 1, 1, 1, 1]);
        let expected = 2.0 * 6.0 / 13.0 - 2.0 * (13.0f64 / 26.0).powi(2);
        assert!((modularity_undirected(&g, &p, 1.0).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.4231).abs() < 1e-4);
    }

    #[test]
    fn errors() {
        let mut b = crate::graph::GraphBuilder::new();
        b.add_node("x", Default::default());
        let g = b.build();
        let p = labels_partition(&g, &[0]);
        assert_eq!(modularity_directed(&g, &p), Err(CommunityError::NoEdges));
        assert_eq!(modularity_undirected(&symmetrize(&g), &p, 1.0), Err(CommunityError::NoEdges));
        assert_eq!(modularity_undirected(&g, &p, 1.0), Err(CommunityError::DirectedInput));
    }

    #[test]
    fn weighted_matches_unweighted_on_simple_graphs() {
        let g = symmetrize(&two_triangles());
        let labels = [0, 0, 1, 1, 1, 0];
        let w = WeightedGraph::from_graph(&g);
        let p = labels_partition(&g, &labels);
        let a = modularity_weighted(&w, &p.labels_for(&g).unwrap(), 1.3).unwrap();
        let b = modularity_undirected(&g, &p, 1.3).unwrap();
        assert!((a - b).abs() < 1e-15);
    }
}

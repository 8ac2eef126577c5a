mod common;

use citescope_core::community::{louvain, modularity_directed, modularity_undirected, LouvainConfig, Partition};
use citescope_core::graph::{symmetrize, CitationGraph};
use common::{adjacency, arb_edges, build};
use proptest::prelude::*;

fn naive_undirected(g: &CitationGraph, labels: &[u32], gamma: f64) -> f64 {
    let a = adjacency(g);
    let n = a.len();
    let k: Vec<f64> = a.iter().map(|row| row.iter().map(|&x| x as f64).sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] as f64 - gamma * k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

fn naive_directed(g: &CitationGraph, labels: &[u32]) -> f64 {
    let a = adjacency(g);
    let n = a.len();
    let out: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] as f64).sum()).collect();
    let inn: Vec<f64> = (0..n).map(|j| (0..n).map(|i| a[i][j] as f64).sum()).collect();
    let m: f64 = out.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] as f64 - out[i] * inn[j] / m;
            }
        }
    }
    q / m
}

fn arb_labeled(max_nodes: usize, max_edges: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<u32>)> {
    arb_edges(max_nodes, max_edges)
        .prop_flat_map(|(n, edges)| (Just(n), Just(edges), prop::collection::vec(0u32..5, n)))
}

proptest! {
    #[test]
    fn undirected_modularity_matches_definition(
        (n, edges, labels) in arb_labeled(30, 80),
        gamma in prop::sample::select(vec![0.5, 1.0, 2.0]),
    ) {
        let g = symmetrize(&build(n, &edges));
        prop_assume!(g.edge_count() > 0);
        let p = Partition::from_labels(&g, &labels, 0, gamma);
        let canonical = p.labels_for(&g).unwrap();
        let q = modularity_undirected(&g, &p, gamma).unwrap();
        prop_assert!((q - naive_undirected(&g, &canonical, gamma)).abs() < 1e-12);
    }

    #[test]
    fn directed_modularity_matches_definition((n, edges, labels) in arb_labeled(30, 80)) {
        let g = build(n, &edges);
        prop_assume!(g.edge_count() > 0);
        let p = Partition::from_labels(&g, &labels, 0, 1.0);
        let q = modularity_directed(&g, &p).unwrap();
        prop_assert!((q - naive_directed(&g, &p.labels_for(&g).unwrap())).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&q));
    }

    #[test]
    fn louvain_beats_singletons((n, edges) in arb_edges(40, 120), seed in any::<u64>()) {
        let g = symmetrize(&build(n, &edges));
        prop_assume!(g.edge_count() > 0);
        let config = LouvainConfig::new(1.0, seed);
        let p = louvain(&g, &config).unwrap();
        let singletons: Vec<u32> = (0..n as u32).collect();
        let single = Partition::from_labels(&g, &singletons, seed, 1.0);
        let q = modularity_undirected(&g, &p, 1.0).unwrap();
        prop_assert!(q >= modularity_undirected(&g, &single, 1.0).unwrap() - 1e-12);
        prop_assert_eq!(louvain(&g, &config).unwrap(), p);
    }
}

/// Three 6-cliques joined in a chain by single edges.
fn clique_chain() -> CitationGraph {
    let mut edges = Vec::new();
    for block in 0..3 {
        let base = block * 6;
        for i in 0..6 {
            for j in i + 1..6 {
                edges.push((base + i, base + j));
            }
        }
    }
    edges.push((5, 6));
    edges.push((11, 12));
    symmetrize(&build(18, &edges))
}

#[test]
fn community_count_grows_with_resolution() {
    let g = clique_chain();
    for seed in 0..10 {
        let counts: Vec<usize> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&gamma| louvain(&g, &LouvainConfig::new(gamma, seed)).unwrap().community_count())
            .collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "seed {seed}: {counts:?}");
        assert_eq!(counts[1], 3);
    }
}

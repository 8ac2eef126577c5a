#![allow(dead_code)]

use citescope_core::graph::{CitationGraph, GraphBuilder, NodeAttrs};
use proptest::prelude::*;

pub fn node_id(i: usize) -> String {
    format!("n{i:03}")
}

/// Directed graph on `n` nodes (all present, isolated ones included).
pub fn build(n: usize, edges: &[(usize, usize)]) -> CitationGraph {
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_node(&node_id(i), NodeAttrs::default());
    }
    for &(u, v) in edges {
        b.add_edge(&node_id(u), &node_id(v));
    }
    b.build()
}

/// `(n, edges)` with `1 <= n <= max_nodes` and up to `max_edges` arcs.
pub fn arb_edges(max_nodes: usize, max_edges: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_nodes).prop_flat_map(move |n| (Just(n), prop::collection::vec((0..n, 0..n), 0..=max_edges)))
}

/// Dense 0/1 adjacency of a graph, symmetric when undirected.
pub fn adjacency(g: &CitationGraph) -> Vec<Vec<u8>> {
    let n = g.node_count();
    let mut a = vec![vec![0u8; n]; n];
    for &(u, v) in g.edges() {
        a[u as usize][v as usize] = 1;
        if !g.is_directed() {
            a[v as usize][u as usize] = 1;
        }
    }
    a
}

#![allow(dead_code)]

use msource::Graph;
use proptest::prelude::*;

/// Random labelled tree: node `i + 1` hangs below `parents[i] % (i + 1)`, then
/// labels are shuffled by the swaps in `perm`.
pub fn tree_from(parents: &[usize], perm: &[usize]) -> Graph {
    let n = parents.len() + 1;
    let mut labels: Vec<usize> = (0..n).collect();
    for (i, &p) in perm.iter().enumerate().take(n) {
        labels.swap(i, p % n);
    }
    let edges = parents
        .iter()
        .enumerate()
        .map(|(i, &p)| (labels[i + 1], labels[p % (i + 1)]));
    Graph::from_edges(n, edges).unwrap()
}

/// Trees with `min_nodes..=max_nodes` nodes.
pub fn tree_strategy(min_nodes: usize, max_nodes: usize) -> impl Strategy<Value = Graph> {
    (min_nodes.max(1) - 1..max_nodes)
        .prop_flat_map(|m| {
            (
                proptest::collection::vec(0usize..64, m),
                proptest::collection::vec(0usize..64, m + 1),
            )
        })
        .prop_map(|(parents, perm)| tree_from(&parents, &perm))
}

/// Applies the node relabelling `perm` (old id -> new id).
pub fn relabel(g: &Graph, perm: &[usize]) -> Graph {
    Graph::from_edges(g.node_count(), g.edges().map(|(u, v)| (perm[u], perm[v]))).unwrap()
}

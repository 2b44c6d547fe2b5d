//! Estimators checked against exhaustive and direct-formula evaluation.

use msource::counting::enumerate_sequences;
use msource::estimators::{
    bfs_scores, geometric_pair_score, geometric_tse, nsse, single_source_scores, sse_bfs, sse_tree,
    tse, TIE_TOLERANCE,
};
use msource::{Graph, NodeSet};
use proptest::prelude::*;

mod common;
use common::{relabel, tree_strategy};

/// Best pair under `score`, ties to the lexicographically smallest pair.
fn brute_best_pair(n: usize, mut score: impl FnMut(usize, usize) -> f64) -> (usize, usize) {
    let mut best = (0, 1, score(0, 1));
    for a in 0..n {
        for b in a + 1..n {
            let s = score(a, b);
            if s > best.2 + TIE_TOLERANCE {
                best = (a, b, s);
            }
        }
    }
    (best.0, best.1)
}

fn permutation(n: usize, swaps: &[usize]) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for (i, &s) in swaps.iter().enumerate().take(n) {
        p.swap(i, s % n);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tse_argmax_matches_enumeration(g in tree_strategy(2, 9)) {
        let brute = brute_best_pair(g.node_count(), |a, b| {
            (enumerate_sequences(&g, &NodeSet::new([a, b])).unwrap() as f64).ln()
        });
        let est = tse(&g).unwrap();
        prop_assert_eq!(est.nodes.as_slice(), &[brute.0, brute.1]);
        let c = enumerate_sequences(&g, &est.nodes).unwrap() as f64;
        prop_assert!((est.score.exp() - c).abs() <= 1e-9 * c);
    }

    #[test]
    fn geometric_tse_matches_direct_formula(g in tree_strategy(2, 9)) {
        let brute = brute_best_pair(g.node_count(), |a, b| {
            geometric_pair_score(&g, a, b, 0.5).unwrap().ln()
        });
        let est = geometric_tse(&g, 0.5).unwrap();
        prop_assert_eq!(est.nodes.as_slice(), &[brute.0, brute.1]);
        let direct = geometric_pair_score(&g, brute.0, brute.1, 0.5).unwrap();
        prop_assert!((est.score.ln() - direct.ln()).abs() < 1e-9);
    }

    #[test]
    fn sse_argmax_matches_enumeration(g in tree_strategy(1, 9)) {
        let counts: Vec<f64> = (0..g.node_count())
            .map(|v| enumerate_sequences(&g, &NodeSet::new([v])).unwrap() as f64)
            .collect();
        let best = (0..counts.len()).fold(0, |b, v| if counts[v] > counts[b] * (1.0 + 1e-12) { v } else { b });
        let est = sse_tree(&g).unwrap();
        prop_assert_eq!(est.nodes.as_slice(), &[best]);
    }

    #[test]
    fn pair_estimates_survive_relabelling(g in tree_strategy(2, 40), swaps in proptest::collection::vec(0usize..64, 40)) {
        let perm = permutation(g.node_count(), &swaps);
        let h = relabel(&g, &perm);
        for delta in [None, Some(1.0)] {
            let (e, f) = match delta {
                None => (tse(&g).unwrap(), tse(&h).unwrap()),
                Some(d) => (geometric_tse(&g, d).unwrap(), geometric_tse(&h, d).unwrap()),
            };
            prop_assert!((e.score.ln() - f.score.ln()).abs() < 1e-7);
            // the relabelled winner scores the same on the original tree
            let mut inv = vec![0; perm.len()];
            for (old, &new) in perm.iter().enumerate() {
                inv[new] = old;
            }
            let back = [inv[f.nodes.as_slice()[0]], inv[f.nodes.as_slice()[1]]];
            let rescored = match delta {
                None => {
                    let t = msource::counting::tree_tables(&g, 0).unwrap();
                    msource::counting::pair_count(&g, back[0], back[1], &t,
                        &mut msource::counting::PairScoreTable::new(g.node_count())).unwrap()
                }
                Some(d) => geometric_pair_score(&g, back[0], back[1], d).unwrap(),
            };
            prop_assert!((rescored.ln() - e.score.ln()).abs() < 1e-7);
        }
    }

    /// Two virtual leaves hung on the sources bound the pair count from both
    /// sides: `C(x1, x2; G') <= 2 (n - 1) C(s1, s2; G)`, and `C(x1, x2; G')` is at
    /// least the geometric score with the `(1 + delta)` factors removed.
    #[test]
    fn virtual_leaf_bounds(g in tree_strategy(2, 9), a in 0usize..64, b in 0usize..64) {
        let n = g.node_count();
        let s1 = a % n;
        let s2 = (s1 + 1 + b % (n - 1)) % n;
        let augmented = Graph::from_edges(
            n + 2,
            g.edges().chain([(s1, n), (s2, n + 1)]),
        ).unwrap();
        let virtual_count = enumerate_sequences(&augmented, &NodeSet::new([n, n + 1])).unwrap() as f64;
        let pair = enumerate_sequences(&g, &NodeSet::new([s1, s2])).unwrap() as f64;
        prop_assert!(virtual_count <= 2.0 * (n as f64 - 1.0) * pair + 1e-9);

        let delta = 0.25;
        let p = g.hop_distances(s1)[s2] + 1;
        let lower = geometric_pair_score(&g, s1, s2, delta).unwrap().ln() - (p - 1) as f64 * (1.0f64 + delta).ln();
        prop_assert!(lower <= virtual_count.ln() + 1e-9);
    }

    #[test]
    fn bfs_scores_on_trees_are_counts_plus_order_weight(g in tree_strategy(1, 30)) {
        let counts = single_source_scores(&g).unwrap();
        let weighted = bfs_scores(&g).unwrap();
        for v in 0..g.node_count() {
            let order = g.bfs_tree(v).unwrap().order;
            let w = msource::counting::sequence_log_probability(&g, &NodeSet::new([v]), &order[1..]).unwrap();
            prop_assert!((weighted[v].ln() - counts[v].ln() - w).abs() < 1e-9);
        }
        let best = sse_bfs(&g).unwrap().nodes.as_slice()[0];
        let expect = (0..g.node_count()).fold(0, |b, v| {
            if weighted[v].ln() > weighted[b].ln() + TIE_TOLERANCE { v } else { b }
        });
        prop_assert_eq!(best, expect);
    }

    #[test]
    fn nsse_takes_the_top_scores(g in tree_strategy(1, 20), k in 1usize..5) {
        let k = k.min(g.node_count());
        let scores = single_source_scores(&g).unwrap();
        let chosen = nsse(&g, k).unwrap().nodes;
        let worst_in = chosen.iter().map(|v| scores[v].ln()).fold(f64::INFINITY, f64::min);
        let best_out = (0..g.node_count())
            .filter(|&v| !chosen.contains(v))
            .map(|v| scores[v].ln())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(worst_in >= best_out - TIE_TOLERANCE);
    }
}

//! Source estimators: single source on trees (SSE) and general graphs via
//! BFS trees (SSE-BFS), exact and geometric-tree two-source estimation
//! (TSE), and the naive top-k baseline (nSSE).

use std::cmp::Ordering;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::counting::{build_tables, SubtreeTable};
use crate::error::{arg, not_a_tree, not_connected, Error, Result};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::logmath::{ln_factorial, log_add_exp, LogCount};

/// Two log scores closer than this are treated as equal and resolved by the
/// node-id tie rule. Equal counts reached along different summation orders
/// differ in the last bits only.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Estimator names, as used in reports and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Sse,
    SseBfs,
    Tse,
    GeoTse,
    Nsse,
    /// nSSE with the source count guessed uniformly from `1..=k_max`.
    NsseRandom,
    Msep,
    MsepBfs,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Sse => "sse",
            Algo::SseBfs => "sse-bfs",
            Algo::Tse => "tse",
            Algo::GeoTse => "geo-tse",
            Algo::Nsse => "nsse",
            Algo::NsseRandom => "nsse-random",
            Algo::Msep => "msep",
            Algo::MsepBfs => "msep-bfs",
        }
    }

    pub fn parse(name: &str) -> Option<Algo> {
        ALL_ALGOS.iter().copied().find(|a| a.name() == name)
    }
}

pub const ALL_ALGOS: [Algo; 8] = [
    Algo::Sse,
    Algo::SseBfs,
    Algo::Tse,
    Algo::GeoTse,
    Algo::Nsse,
    Algo::NsseRandom,
    Algo::Msep,
    Algo::MsepBfs,
];

/// Estimated source set with the log score that selected it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceEstimate {
    pub algo: Algo,
    pub nodes: NodeSet,
    #[serde(rename = "log_score")]
    pub score: LogCount,
}

impl SourceEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("estimate serializes")
    }
}

/// Regularity constants of a geometric tree and the Q-factor parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoParams {
    pub alpha: f64,
    pub b: f64,
    pub c: f64,
    pub d_min: usize,
    pub d_max: usize,
    pub delta: f64,
}

impl Default for GeoParams {
    fn default() -> Self {
        GeoParams {
            alpha: 1.0,
            b: 1.0,
            c: 1.0,
            d_min: 7,
            d_max: 7,
            delta: 1.0,
        }
    }
}

impl GeoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b <= self.c) {
            return arg(format!("need 0 < b <= c, got b = {}, c = {}", self.b, self.c));
        }
        if !(2 <= self.d_min && self.d_min <= self.d_max) {
            return arg(format!("need 2 <= d_min <= d_max, got {} and {}", self.d_min, self.d_max));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return arg(format!("delta must be positive, got {}", self.delta));
        }
        Ok(())
    }
}

/// Open interval of admissible `delta` values for the geometric-tree
/// estimator, after checking that the source degrees are large enough
/// relative to the regularity constants.
pub fn delta_interval(geo: &GeoParams) -> Result<(f64, f64)> {
    if !(geo.b > 0.0 && geo.c > 0.0 && geo.d_min >= 2 && geo.d_min <= geo.d_max) {
        return arg("regularity constants must be positive with 2 <= d_min <= d_max");
    }
    let (b, c) = (geo.b, geo.c);
    let (d_min, d_max) = (geo.d_min as f64, geo.d_max as f64);
    let low = c * d_max / (b * (d_min - 1.0)) - 1.0;
    let high = b * (d_min - 2.0) / (2.0 * c) - 1.0;
    if low >= high {
        return Err(Error::Infeasible {
            low,
            high,
            msg: "interval is empty".into(),
        });
    }
    let needed = 1.5 + (c / b) * (2.0 * d_max).sqrt();
    if d_min < needed {
        return Err(Error::Infeasible {
            low,
            high,
            msg: format!("d_min = {d_min} is below the required {needed:.3}"),
        });
    }
    Ok((low, high))
}

/// Index of the largest score; near-ties go to the smallest index.
fn argmax(scores: &[LogCount]) -> usize {
    let mut best = 0;
    for (v, s) in scores.iter().enumerate().skip(1) {
        if s.ln() > scores[best].ln() + TIE_TOLERANCE {
            best = v;
        }
    }
    best
}

/// `ln C(v)` for every node of a tree.
pub fn single_source_scores(g: &Graph) -> Result<Vec<LogCount>> {
    if !g.is_tree() {
        return not_a_tree();
    }
    let table = build_tables(g, 0);
    let lf = ln_factorial(g.node_count());
    Ok((0..g.node_count()).map(|v| table.single_source_log_count(v, lf)).collect())
}

/// Single-source estimate on a tree: the node with the most infection
/// sequences.
pub fn sse_tree(g: &Graph) -> Result<SourceEstimate> {
    let scores = single_source_scores(g)?;
    let best = argmax(&scores);
    Ok(SourceEstimate {
        algo: Algo::Sse,
        nodes: NodeSet::new([best]),
        score: scores[best],
    })
}

/// BFS-weighted single-source score of every node: the log probability of
/// the BFS discovery order from `v` under the spreading law on `g`, plus the
/// log sequence count of `v` on its BFS tree.
pub fn bfs_scores(g: &Graph) -> Result<Vec<LogCount>> {
    if g.node_count() == 0 || !g.is_connected() {
        return not_connected();
    }
    let n = g.node_count();
    let lf = ln_factorial(n);
    let mut infected = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for v in 0..n {
        let bfs = g.bfs_tree(v)?;
        let table = build_tables(&bfs.tree, v);
        let count = table.single_source_log_count(v, lf);
        out.push(LogCount(count.ln() + bfs_order_log_probability(g, &bfs.order, &mut infected)));
    }
    Ok(out)
}

/// Log probability of infecting `order[1..]` in order starting from
/// `order[0]`. `infected` is scratch space, returned all false.
fn bfs_order_log_probability(g: &Graph, order: &[NodeId], infected: &mut [bool]) -> f64 {
    let root = order[0];
    infected[root] = true;
    let mut open = g.degree(root);
    let mut total = 0.0;
    for &v in &order[1..] {
        let into = g.neighbors(v).iter().filter(|&&w| infected[w]).count();
        total += (into as f64).ln() - (open as f64).ln();
        infected[v] = true;
        open = open + g.degree(v) - 2 * into;
    }
    for &v in order {
        infected[v] = false;
    }
    total
}

/// Single-source estimate on a general graph through BFS spanning trees.
pub fn sse_bfs(g: &Graph) -> Result<SourceEstimate> {
    let scores = bfs_scores(g)?;
    let best = argmax(&scores);
    Ok(SourceEstimate {
        algo: Algo::SseBfs,
        nodes: NodeSet::new([best]),
        score: scores[best],
    })
}

/// Naive `k`-source baseline: the `k` best single-source scores (tree
/// counts on trees, BFS-weighted scores otherwise).
pub fn nsse(g: &Graph, k: usize) -> Result<SourceEstimate> {
    if k == 0 || k > g.node_count() {
        return arg(format!("k = {k} must lie in 1..={}", g.node_count()));
    }
    let scores = if g.is_tree() { single_source_scores(g)? } else { bfs_scores(g)? };
    let mut ranked: Vec<usize> = (0..g.node_count()).collect();
    ranked.sort_by(|&a, &b| match scores[b].ln() - scores[a].ln() {
        d if d > TIE_TOLERANCE => Ordering::Greater,
        d if d < -TIE_TOLERANCE => Ordering::Less,
        _ => a.cmp(&b),
    });
    Ok(SourceEstimate {
        algo: Algo::Nsse,
        nodes: NodeSet::new(ranked[..k].iter().copied()),
        score: scores[ranked[0]],
    })
}

/// BFS parents of a tree from every root, row-major by root.
struct PairGeometry {
    n: usize,
    parent: Vec<u32>,
}

impl PairGeometry {
    /// Also returns the pairs `a < b` grouped by distance, with the start
    /// offset of every distance. Each pair carries the neighbor of `a` on the
    /// way to `b`.
    fn new(g: &Graph) -> (PairGeometry, Vec<[u32; 3]>, Vec<usize>) {
        let n = g.node_count();
        let mut parent = vec![0u32; n * n];
        let mut dist = vec![u32::MAX; n];
        let mut branch = vec![0u32; n];
        let mut buckets: Vec<Vec<[u32; 3]>> = Vec::new();
        let mut queue = VecDeque::new();
        for r in 0..n {
            let row = r * n;
            dist.fill(u32::MAX);
            dist[r] = 0;
            parent[row + r] = r as u32;
            queue.push_back(r);
            while let Some(u) = queue.pop_front() {
                for &v in g.neighbors(u) {
                    if dist[v] == u32::MAX {
                        let d = dist[u] + 1;
                        dist[v] = d;
                        parent[row + v] = u as u32;
                        branch[v] = if u == r { v as u32 } else { branch[u] };
                        queue.push_back(v);
                        if v > r {
                            let d = d as usize;
                            if buckets.len() <= d {
                                buckets.resize_with(d + 1, Vec::new);
                            }
                            buckets[d].push([r as u32, v as u32, branch[v]]);
                        }
                    }
                }
            }
        }
        let mut starts = vec![0];
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for bucket in buckets {
            pairs.extend(bucket);
            starts.push(pairs.len());
        }
        if starts.len() == 1 {
            starts.push(0);
        }
        (PairGeometry { n, parent }, pairs, starts)
    }

    /// Neighbor of `v` on the way to `root`.
    fn toward(&self, root: NodeId, v: NodeId) -> NodeId {
        self.parent[root * self.n + v] as usize
    }
}

/// What a pair sweep scores; see [`pair_sweep`].
#[derive(Debug, Clone, Copy)]
enum PairObjective {
    Exact,
    Geometric { delta: f64 },
}

/// Everything the sweep remembers about a scored pair, kept together so a
/// lookup touches one cache line.
#[derive(Debug, Clone, Copy)]
struct SweepCell {
    /// `ln prod |T_u(s1, s2)|` over the nodes `u` off the path.
    log_off: f64,
    log_q: f64,
    path_size: u32,
}

/// [`SweepCell`]s of all unordered pairs in a packed triangle.
struct SweepTable {
    row_start: Vec<usize>,
    cells: Vec<SweepCell>,
}

impl SweepTable {
    fn new(n: usize) -> SweepTable {
        let row_start = (0..n).map(|i| i * (2 * n - i - 1) / 2).collect();
        let empty = SweepCell {
            log_off: 0.0,
            log_q: 0.0,
            path_size: 0,
        };
        SweepTable {
            row_start,
            cells: vec![empty; n * n.saturating_sub(1) / 2],
        }
    }

    fn index(&self, a: NodeId, b: NodeId) -> usize {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.row_start[i] + (j - i - 1)
    }
}

/// Scores every unordered pair of a tree in order of increasing distance and
/// returns the best `(a, b, score)`, ties to the lexicographically smallest.
///
/// Off-path products and span counts both extend the shorter pair `(a, last)`
/// by one node, so each pair costs O(1) beyond the geometric path sizes.
fn pair_sweep(g: &Graph, objective: PairObjective) -> Result<(NodeId, NodeId, LogCount)> {
    if !g.is_tree() {
        return not_a_tree();
    }
    let n = g.node_count();
    if n < 2 {
        return arg("two-source estimation needs at least two nodes");
    }
    let table = build_tables(g, 0);
    let (geo, pairs, starts) = PairGeometry::new(g);
    let into: Vec<f64> = (0..n).map(|v| table.log_g_into(v)).collect();
    let mut memo = SweepTable::new(n);
    let ln_pair_base = ln_factorial(n - 2);
    let ln_full = ln_factorial(n);
    let mut sizes = Vec::new();

    let mut best: Option<(NodeId, NodeId, f64)> = None;
    for d in 1..starts.len().saturating_sub(1) {
        for &[a, b, first] in &pairs[starts[d]..starts[d + 1]] {
            let (a, b, first) = (a as NodeId, b as NodeId, first as NodeId);
            let last = geo.toward(a, b);
            let shorter = if d >= 2 { Some(memo.cells[memo.index(a, last)]) } else { None };
            let base = match shorter {
                None => into[a] - table.log_g(b, a),
                Some(c) => c.log_off - table.log_g(b, last),
            };
            let log_off = base + into[b] - table.log_g(last, b);
            let mut cell = SweepCell {
                log_off,
                log_q: 0.0,
                path_size: 0,
            };
            let score = match objective {
                PairObjective::Exact => {
                    if let Some(left) = shorter {
                        let before = geo.toward(a, last);
                        let last_size = (n - table.size(before, last) - table.size(b, last)) as u32;
                        cell.path_size = left.path_size + last_size;
                        let ln_size = (cell.path_size as f64).ln();
                        cell.log_q = if d == 2 {
                            -ln_size
                        } else {
                            let right = memo.cells[memo.index(first, b)];
                            log_add_exp(right.log_q, left.log_q) - ln_size
                        };
                    }
                    ln_pair_base + cell.log_q - log_off
                }
                PairObjective::Geometric { delta } => {
                    path_sizes(&table, &geo, a, b, &mut sizes);
                    ln_full + d as f64 * (2.0 * (1.0 + delta)).ln() - log_descending_prefix(&mut sizes) - log_off
                }
            };
            let i = memo.index(a, b);
            memo.cells[i] = cell;
            let better = match best {
                None => true,
                Some((ba, bb, bs)) => {
                    score > bs + TIE_TOLERANCE || (score >= bs - TIE_TOLERANCE && (a, b) < (ba, bb))
                }
            };
            if better {
                best = Some((a, b, score));
            }
        }
    }
    let (a, b, s) = best.expect("at least one pair");
    Ok((a, b, LogCount(s)))
}

/// `|T_u(a, b)|` for every node `u` on the path from `a` to `b`.
fn path_sizes(table: &SubtreeTable, geo: &PairGeometry, a: NodeId, b: NodeId, out: &mut Vec<usize>) {
    // Walked from `b` back to `a` so that only the BFS row of `a` is read;
    // the order does not matter to the caller.
    out.clear();
    let last = geo.toward(a, b);
    out.push(table.size(b, last));
    let mut prev = b;
    let mut cur = last;
    while cur != a {
        let next = geo.toward(a, cur);
        out.push(table.node_count() - table.size(prev, cur) - table.size(next, cur));
        prev = cur;
        cur = next;
    }
    out.push(table.size(a, prev));
}

/// `sum_i ln I*_i` for the sizes (sorted in place, descending).
fn log_descending_prefix(sizes: &mut [usize]) -> f64 {
    sizes.sort_unstable_by(|x, y| y.cmp(x));
    let mut acc = 0usize;
    sizes
        .iter()
        .map(|&s| {
            acc += s;
            (acc as f64).ln()
        })
        .sum()
}

/// Exact two-source estimate on a tree: the pair with the most infection
/// sequences.
pub fn tse(g: &Graph) -> Result<SourceEstimate> {
    let (a, b, score) = pair_sweep(g, PairObjective::Exact)?;
    Ok(SourceEstimate {
        algo: Algo::Tse,
        nodes: NodeSet::new([a, b]),
        score,
    })
}

/// Two-source estimate for geometric trees, replacing the exact path term
/// with `[2(1 + delta)]^(p-1) / prod_i I*_i`, `p` the number of path nodes.
pub fn geometric_tse(g: &Graph, delta: f64) -> Result<SourceEstimate> {
    if !(delta > 0.0 && delta.is_finite()) {
        return arg(format!("delta must be positive, got {delta}"));
    }
    let (a, b, score) = pair_sweep(g, PairObjective::Geometric { delta })?;
    Ok(SourceEstimate {
        algo: Algo::GeoTse,
        nodes: NodeSet::new([a, b]),
        score,
    })
}

/// The geometric-tree score of a single pair, evaluated directly.
pub fn geometric_pair_score(g: &Graph, s1: NodeId, s2: NodeId, delta: f64) -> Result<LogCount> {
    if !g.is_tree() {
        return not_a_tree();
    }
    if s1 == s2 || s1 >= g.node_count() || s2 >= g.node_count() {
        return arg("need two distinct nodes of the tree");
    }
    if !(delta > 0.0) {
        return arg(format!("delta must be positive, got {delta}"));
    }
    let table = build_tables(g, s1);
    let path = crate::counting::tree_path(g, s1, s2);
    let p = path.len();
    let mut sizes = Vec::with_capacity(p);
    sizes.push(table.size(s1, path[1]));
    for i in 1..p - 1 {
        sizes.push(crate::counting::interior_size(&table, path[i - 1], path[i], path[i + 1]));
    }
    sizes.push(table.size(s2, path[p - 2]));
    let log_off = crate::counting::off_path_log_product(&table, &path);
    Ok(LogCount(
        ln_factorial(g.node_count()) + (p - 1) as f64 * (2.0 * (1.0 + delta)).ln()
            - log_descending_prefix(&mut sizes)
            - log_off,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{enumerate_sequences, sequence_log_probability};

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).unwrap()
    }

    #[test]
    fn sse_examples() {
        let e = sse_tree(&star(3)).unwrap();
        assert_eq!(e.nodes.as_slice(), &[0]);
        assert!((e.score.exp() - 6.0).abs() < 1e-9);
        assert_eq!(sse_tree(&path(3)).unwrap().nodes.as_slice(), &[1]);
        let single = sse_tree(&Graph::empty(1)).unwrap();
        assert_eq!((single.nodes.as_slice(), single.score.ln()), (&[0][..], 0.0));
        let cycle = Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(sse_tree(&cycle).unwrap_err().to_string(), "input is not a tree");
    }

    #[test]
    fn sse_bfs_examples() {
        let cycle = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(sse_bfs(&cycle).unwrap().nodes.as_slice(), &[0]);
        assert_eq!(sse_bfs(&path(2)).unwrap().nodes.as_slice(), &[0]);
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(sse_bfs(&split), Err(Error::Structure(_))));
    }

    #[test]
    fn bfs_score_is_count_plus_order_probability() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (1, 3), (3, 4), (4, 5), (0, 5)]).unwrap();
        let scores = bfs_scores(&g).unwrap();
        for v in 0..6 {
            let bfs = g.bfs_tree(v).unwrap();
            let count = enumerate_sequences(&bfs.tree, &NodeSet::new([v])).unwrap() as f64;
            let lp = sequence_log_probability(&g, &NodeSet::new([v]), &bfs.order[1..]).unwrap();
            assert!((scores[v].ln() - (count.ln() + lp)).abs() < 1e-9);
        }
    }

    #[test]
    fn tse_examples() {
        let e = tse(&path(4)).unwrap();
        assert_eq!(e.nodes.as_slice(), &[0, 2]);
        assert!((e.score.exp() - 2.0).abs() < 1e-9);
        let e = tse(&path(2)).unwrap();
        assert_eq!((e.nodes.as_slice(), e.score.ln()), (&[0, 1][..], 0.0));
        assert!(matches!(tse(&Graph::empty(1)), Err(Error::Argument(_))));
        assert!(matches!(geometric_tse(&path(3), 0.0), Err(Error::Argument(_))));
        assert_eq!(geometric_tse(&path(2), 3.0).unwrap().nodes.as_slice(), &[0, 1]);
    }

    #[test]
    fn adjacent_geometric_score() {
        // sizes 2 and 3 around the edge 1-2 of a 5-path: I* = (3, 5); node 3
        // carries the only off-path subtree larger than one node
        let g = path(5);
        let s = geometric_pair_score(&g, 1, 2, 0.5).unwrap();
        let direct = ln_factorial(5) + 3f64.ln() - 15f64.ln() - 2f64.ln();
        assert!((s.ln() - direct).abs() < 1e-12);
    }

    #[test]
    fn delta_interval_examples() {
        let geo = |d_min, d_max| GeoParams {
            d_min,
            d_max,
            ..GeoParams::default()
        };
        let (lo, hi) = delta_interval(&geo(6, 8)).unwrap();
        assert!((lo - 0.6).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        match delta_interval(&geo(3, 8)) {
            Err(Error::Infeasible { low, high, .. }) => assert_eq!((low, high), (3.0, -0.5)),
            other => panic!("expected infeasible, got {other:?}"),
        }
        let (lo, hi) = delta_interval(&geo(13, 13)).unwrap();
        assert!((lo - 1.0 / 12.0).abs() < 1e-12 && (hi - 4.5).abs() < 1e-12);
        let (lo, hi) = delta_interval(&geo(7, 7)).unwrap();
        assert!(lo < 1.0 && 1.0 < hi);
    }

    #[test]
    fn nsse_examples() {
        assert_eq!(nsse(&star(3), 2).unwrap().nodes.as_slice(), &[0, 1]);
        assert_eq!(nsse(&star(3), 1).unwrap().nodes, sse_tree(&star(3)).unwrap().nodes);
        assert_eq!(nsse(&path(4), 4).unwrap().nodes.len(), 4);
        assert!(nsse(&path(4), 5).is_err());
        assert!(nsse(&path(4), 0).is_err());
    }

    #[test]
    fn estimate_json_shape() {
        let e = tse(&path(2)).unwrap();
        assert_eq!(e.to_json(), r#"{"algo":"tse","nodes":[0,1],"log_score":0.0}"#);
    }
}

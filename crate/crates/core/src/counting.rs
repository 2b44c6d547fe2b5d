//! Infection sequences: validity, step probabilities, exact enumeration for
//! small graphs, and the log-domain counting machinery for trees.
//!
//! On a tree with `n` infected nodes the single-source count is
//! `n! / prod_u |T_u(s)|`, where `T_u(s)` is the subtree hanging below `u`
//! when the tree is rooted at `s`. For two sources joined by the path
//! `(s1, u_1, .., u_m, s2)` the count is
//! `(n-2)! * q(u_1, u_m; s1, s2) / prod_{u off the path} |T_u(s1, s2)|`,
//! with `q` given by a two-term recursion over shorter path spans.

use std::collections::VecDeque;

use crate::error::{arg, not_a_tree, Error, Result};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::logmath::{ln_factorial, log_add_exp, LogCount};
use crate::partition::Partition;

/// Largest number of non-source nodes accepted by the exhaustive routines.
pub const ENUMERATION_LIMIT: usize = 12;

fn check_sequence(g: &Graph, sources: &NodeSet, seq: &[NodeId]) -> Result<()> {
    sources.check_within(g)?;
    let mut seen = vec![false; g.node_count()];
    for &v in seq {
        if v >= g.node_count() {
            return arg(format!("node {v} outside graph of {} nodes", g.node_count()));
        }
        if sources.contains(v) {
            return arg(format!("sequence contains source {v}"));
        }
        if seen[v] {
            return arg(format!("node {v} repeated in sequence"));
        }
        seen[v] = true;
    }
    Ok(())
}

/// True iff every node of `seq` has a neighbor among the sources or the
/// nodes preceding it.
pub fn validate_sequence(g: &Graph, sources: &NodeSet, seq: &[NodeId]) -> Result<bool> {
    check_sequence(g, sources, seq)?;
    let mut infected = vec![false; g.node_count()];
    for s in sources.iter() {
        infected[s] = true;
    }
    for &v in seq {
        if !g.neighbors(v).iter().any(|&w| infected[w]) {
            return Ok(false);
        }
        infected[v] = true;
    }
    Ok(true)
}

/// Per-step factors `(edges into the chosen node, susceptible edges)`.
fn step_fractions(g: &Graph, sources: &NodeSet, seq: &[NodeId]) -> Result<Vec<(usize, usize)>> {
    check_sequence(g, sources, seq)?;
    let mut infected = vec![false; g.node_count()];
    for s in sources.iter() {
        infected[s] = true;
    }
    let mut open: usize = sources
        .iter()
        .map(|s| g.neighbors(s).iter().filter(|&&w| !infected[w]).count())
        .sum();
    let mut out = Vec::with_capacity(seq.len());
    for &v in seq {
        let into = g.neighbors(v).iter().filter(|&&w| infected[w]).count();
        if into == 0 {
            return arg(format!("node {v} has no infected neighbor; not an infection sequence"));
        }
        out.push((into, open));
        infected[v] = true;
        let outward = g.neighbors(v).iter().filter(|&&w| !infected[w]).count();
        open = open - into + outward;
    }
    Ok(out)
}

/// Probability of observing `seq` as the first infections after `sources`:
/// the product over steps of the number of edges from the infected set to
/// the chosen node over the number of edges from the infected set to all
/// susceptible nodes of `g`.
pub fn sequence_probability(g: &Graph, sources: &NodeSet, seq: &[NodeId]) -> Result<f64> {
    Ok(step_fractions(g, sources, seq)?
        .into_iter()
        .map(|(a, b)| a as f64 / b as f64)
        .product())
}

/// Natural log of [`sequence_probability`], safe for long sequences.
pub fn sequence_log_probability(g: &Graph, sources: &NodeSet, seq: &[NodeId]) -> Result<f64> {
    Ok(step_fractions(g, sources, seq)?
        .into_iter()
        .map(|(a, b)| (a as f64).ln() - (b as f64).ln())
        .sum())
}

fn non_sources(g: &Graph, sources: &NodeSet) -> Result<Vec<NodeId>> {
    sources.check_within(g)?;
    if sources.is_empty() {
        return arg("at least one source is required");
    }
    let rest: Vec<NodeId> = (0..g.node_count()).filter(|&v| !sources.contains(v)).collect();
    if rest.len() > ENUMERATION_LIMIT {
        return Err(Error::Refused(format!(
            "{} non-source nodes exceed the enumeration limit of {ENUMERATION_LIMIT}",
            rest.len()
        )));
    }
    Ok(rest)
}

/// Number of infection sequences of `g` (every node infected) from
/// `sources`, by exhaustive dynamic programming over infected subsets.
pub fn enumerate_sequences(g: &Graph, sources: &NodeSet) -> Result<u128> {
    let rest = non_sources(g, sources)?;
    let m = rest.len();
    let touches = neighbor_masks(g, sources, &rest);
    let mut count = vec![0u128; 1 << m];
    count[0] = 1;
    for mask in 0..(1usize << m) {
        let c = count[mask];
        if c == 0 {
            continue;
        }
        for i in 0..m {
            let bit = 1 << i;
            if mask & bit == 0 && touches[i].reachable(mask) {
                count[mask | bit] += c;
            }
        }
    }
    Ok(count[(1 << m) - 1])
}

/// All infection sequences of `g` from `sources`, in lexicographic order.
pub fn list_sequences(g: &Graph, sources: &NodeSet) -> Result<Vec<Vec<NodeId>>> {
    let rest = non_sources(g, sources)?;
    let touches = neighbor_masks(g, sources, &rest);
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn walk(
        mask: usize,
        rest: &[NodeId],
        touches: &[Reach],
        current: &mut Vec<NodeId>,
        out: &mut Vec<Vec<NodeId>>,
    ) {
        if current.len() == rest.len() {
            out.push(current.clone());
            return;
        }
        for i in 0..rest.len() {
            if mask & (1 << i) == 0 && touches[i].reachable(mask) {
                current.push(rest[i]);
                walk(mask | (1 << i), rest, touches, current, out);
                current.pop();
            }
        }
    }
    walk(0, &rest, &touches, &mut current, &mut out);
    Ok(out)
}

/// Neighborhood of a non-source node expressed over the enumeration bitmask.
struct Reach {
    near_source: bool,
    mask: usize,
}

impl Reach {
    fn reachable(&self, infected: usize) -> bool {
        self.near_source || self.mask & infected != 0
    }
}

fn neighbor_masks(g: &Graph, sources: &NodeSet, rest: &[NodeId]) -> Vec<Reach> {
    let pos = |v: NodeId| rest.binary_search(&v).ok();
    rest.iter()
        .map(|&v| {
            let mut mask = 0;
            let mut near_source = false;
            for &w in g.neighbors(v) {
                if sources.contains(w) {
                    near_source = true;
                } else if let Some(j) = pos(w) {
                    mask |= 1 << j;
                }
            }
            Reach { near_source, mask }
        })
        .collect()
}

/// Unnormalized probability of the coloring `coloring` of the
/// source-connecting graph `h`: the total probability of all infection
/// sequences of `h` in which every node is infected by a neighbor of its own
/// color. Each sequence is weighted by the spreading step law on `h`, which
/// for paths meeting only at sources is `2^p * prod_l p_l` with
/// `p_l = 1 / (sum_s deg(s) - 2 * completed paths)`.
pub fn partition_weight(h: &Graph, sources: &NodeSet, coloring: &Partition) -> Result<LogCount> {
    let rest = non_sources(h, sources)?;
    if coloring.node_count() != h.node_count() || coloring.nodes().any(|v| v >= h.node_count()) {
        return arg("coloring must cover exactly the nodes of the graph");
    }
    if NodeSet::new(coloring.centers().iter().copied()) != *sources
        || coloring.centers().len() != sources.len()
    {
        return arg("coloring centers must be the sources");
    }
    if !coloring.regions_connected(h) {
        return arg("a color class is disconnected or misses its source");
    }
    let m = rest.len();
    let color = |v: NodeId| coloring.region_of(v).expect("covered");
    let pos = |v: NodeId| rest.binary_search(&v).ok();
    let infected_in = |mask: usize, v: NodeId| match pos(v) {
        Some(j) => mask & (1 << j) != 0,
        None => true,
    };
    let mut weight = vec![0f64; 1 << m];
    weight[0] = 1.0;
    for mask in 0..(1usize << m) {
        let w = weight[mask];
        if w == 0.0 {
            continue;
        }
        let open: usize = (0..h.node_count())
            .filter(|&v| infected_in(mask, v))
            .map(|v| h.neighbors(v).iter().filter(|&&x| !infected_in(mask, x)).count())
            .sum();
        for (i, &v) in rest.iter().enumerate() {
            if mask & (1 << i) != 0 {
                continue;
            }
            let same_color = h
                .neighbors(v)
                .iter()
                .any(|&x| infected_in(mask, x) && color(x) == color(v));
            if !same_color {
                continue;
            }
            let into = h.neighbors(v).iter().filter(|&&x| infected_in(mask, x)).count();
            weight[mask | (1 << i)] += w * into as f64 / open as f64;
        }
    }
    Ok(LogCount::from_count(weight[(1 << m) - 1]))
}

/// `I*_i`: prefix sums of the sizes sorted in descending order.
pub fn descending_prefix_sums(sizes: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    prefix_sums(&sorted)
}

/// `I_i`: prefix sums of the sizes in the order given.
pub fn prefix_sums(sizes: &[usize]) -> Result<Vec<usize>> {
    if sizes.is_empty() {
        return arg("at least one subtree size is required");
    }
    if sizes.contains(&0) {
        return arg("subtree sizes must be positive");
    }
    Ok(sizes
        .iter()
        .scan(0usize, |acc, &s| {
            *acc += s;
            Some(*acc)
        })
        .collect())
}

/// Subtree sizes and log subtree-size products for every ordered pair of
/// adjacent tree nodes.
///
/// For an edge `(w, u)`, `size(w, u)` is the number of nodes on `w`'s side
/// once the edge is cut, and `log_g(w, u)` is the log of the product of the
/// subtree sizes of those nodes when rooted towards `u`.
#[derive(Debug, Clone)]
pub struct SubtreeTable {
    n: usize,
    // Compact u32 indices keep the working set of large trees in cache.
    offsets: Vec<u32>,
    targets: Vec<u32>,
    size: Vec<u32>,
    log_g: Vec<f64>,
    /// `log_g_into` of every node, filled by the downward pass.
    into: Vec<f64>,
}

impl SubtreeTable {
    pub fn node_count(&self) -> usize {
        self.n
    }

    fn slot(&self, w: NodeId, u: NodeId) -> usize {
        let lo = self.offsets[w] as usize;
        let nb = &self.targets[lo..self.offsets[w + 1] as usize];
        match nb.binary_search(&(u as u32)) {
            Ok(k) => lo + k,
            Err(_) => panic!("nodes {w} and {u} are not adjacent"),
        }
    }

    /// `|T_w(u)|` for adjacent `w`, `u`.
    pub fn size(&self, w: NodeId, u: NodeId) -> usize {
        self.size[self.slot(w, u)] as usize
    }

    /// `ln g_w(u)` for adjacent `w`, `u`.
    pub fn log_g(&self, w: NodeId, u: NodeId) -> f64 {
        self.log_g[self.slot(w, u)]
    }

    /// Sum over the neighbors `x` of `w` of `ln g_x(w)`, i.e. the log product of
    /// `|T_v(w)|` over all `v != w`.
    pub fn log_g_into(&self, w: NodeId) -> f64 {
        self.into[w]
    }

    /// `ln C(s)` for the tree the table was built from.
    pub fn single_source_log_count(&self, s: NodeId, ln_n_fact: f64) -> LogCount {
        LogCount(ln_n_fact - (self.n as f64).ln() - self.log_g_into(s))
    }
}

/// Builds the [`SubtreeTable`] of a tree with two message passes over the
/// tree rooted at `root`: sizes and products flow from the leaves up, then
/// the products towards every child flow back down.
pub fn tree_tables(g: &Graph, root: NodeId) -> Result<SubtreeTable> {
    if !g.is_tree() {
        return not_a_tree();
    }
    if root >= g.node_count() {
        return arg(format!("root {root} outside graph"));
    }
    Ok(build_tables(g, root))
}

pub(crate) fn build_tables(g: &Graph, root: NodeId) -> SubtreeTable {
    let n = g.node_count();
    let m = 2 * g.edge_count();
    assert!(m < u32::MAX as usize, "tree too large for 32-bit slots");
    let mut offsets: Vec<u32> = Vec::with_capacity(n + 1);
    let mut targets: Vec<u32> = Vec::with_capacity(m);
    offsets.push(0);
    for v in 0..n {
        targets.extend(g.neighbors(v).iter().map(|&u| u as u32));
        offsets.push(targets.len() as u32);
    }
    let slots = |w: usize| offsets[w] as usize..offsets[w + 1] as usize;
    // rev[k] is the slot of the reversed edge; neighbor lists are sorted, so
    // walking every list in order fills each node's reversed slots in order.
    let mut rev = vec![0u32; m];
    let mut cursor = offsets.clone();
    for w in 0..n {
        for k in slots(w) {
            let u = targets[k] as usize;
            rev[k] = cursor[u];
            cursor[u] += 1;
        }
    }
    drop(cursor);

    const NONE: u32 = u32::MAX;
    let mut parent_slot = vec![NONE; n];
    let mut order: Vec<u32> = Vec::with_capacity(n);
    order.push(root as u32);
    let mut head = 0;
    while head < order.len() {
        let u = order[head] as usize;
        head += 1;
        for k in slots(u) {
            let v = targets[k] as usize;
            if v != root && parent_slot[v] == NONE {
                parent_slot[v] = rev[k];
                order.push(v as u32);
            }
        }
    }

    let mut size = vec![0u32; m];
    let mut log_g = vec![0.0; m];
    // leaves to root
    for &w in order.iter().skip(1).rev() {
        let w = w as usize;
        let up = parent_slot[w] as usize;
        let mut f = 1u32;
        let mut lg = 0.0;
        for k in slots(w) {
            if k != up {
                let r = rev[k] as usize;
                f += size[r];
                lg += log_g[r];
            }
        }
        size[up] = f;
        log_g[up] = f64::from(f).ln() + lg;
        size[rev[up] as usize] = n as u32 - f;
    }

    // root to leaves: once the edge into `w` from its parent is known, every
    // term of `w`'s incoming product is known.
    let mut into = vec![0.0; n];
    for &w in &order {
        let w = w as usize;
        let incoming: f64 = slots(w).map(|k| log_g[rev[k] as usize]).sum();
        into[w] = incoming;
        let up = parent_slot[w] as usize;
        for k in slots(w) {
            if k == up {
                continue;
            }
            let lg = f64::from(size[k]).ln() + incoming - log_g[rev[k] as usize];
            log_g[k] = lg.max(0.0);
        }
    }
    SubtreeTable {
        n,
        offsets,
        targets,
        size,
        log_g,
        into,
    }
}

/// `ln C(s)` on the tree `g`: `ln n! - sum_u ln |T_u(s)|`.
pub fn single_source_count(g: &Graph, s: NodeId, table: &SubtreeTable) -> Result<LogCount> {
    if !g.is_tree() {
        return not_a_tree();
    }
    if s >= g.node_count() || table.node_count() != g.node_count() {
        return arg(format!("node {s} outside the tree"));
    }
    Ok(table.single_source_log_count(s, ln_factorial(g.node_count())))
}

/// Memoized path-span quantities of the two-source recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEntry {
    /// `ln q(u_1, u_m; s1, s2)` for the path `(s1, u_1, .., u_m, s2)`.
    pub log_q: f64,
    /// `|T_{rho(u_1, u_m)}(s1, s2)|`: nodes hanging from the path interior.
    pub path_size: usize,
}

/// Memo of [`PairEntry`] values keyed by unordered endpoint pair. The
/// quantities are symmetric in the endpoints, so each pair is stored once.
#[derive(Debug, Clone)]
pub struct PairScoreTable {
    n: usize,
    // Split columns keep the table small; NaN marks a missing entry.
    log_q: Vec<f64>,
    path_size: Vec<u32>,
}

impl PairScoreTable {
    pub fn new(n: usize) -> PairScoreTable {
        let pairs = n * n.saturating_sub(1) / 2;
        PairScoreTable {
            n,
            log_q: vec![f64::NAN; pairs],
            path_size: vec![0; pairs],
        }
    }

    fn index(&self, a: NodeId, b: NodeId) -> usize {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        debug_assert!(i != j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, a: NodeId, b: NodeId) -> Option<PairEntry> {
        let i = self.index(a, b);
        let log_q = self.log_q[i];
        (!log_q.is_nan()).then(|| PairEntry {
            log_q,
            path_size: self.path_size[i] as usize,
        })
    }

    pub fn insert(&mut self, a: NodeId, b: NodeId, entry: PairEntry) {
        debug_assert!(!entry.log_q.is_nan());
        let i = self.index(a, b);
        self.log_q[i] = entry.log_q;
        self.path_size[i] = entry.path_size as u32;
    }

    pub fn len(&self) -> usize {
        self.log_q.iter().filter(|q| !q.is_nan()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Path from `a` to `b` in a tree, endpoints included.
pub(crate) fn tree_path(g: &Graph, a: NodeId, b: NodeId) -> Vec<NodeId> {
    let mut parent = vec![usize::MAX; g.node_count()];
    let mut queue = VecDeque::new();
    parent[a] = a;
    queue.push_back(a);
    while let Some(u) = queue.pop_front() {
        if u == b {
            break;
        }
        for &v in g.neighbors(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    let mut path = vec![b];
    let mut cur = b;
    while cur != a {
        cur = parent[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// `|T_v(s1, s2)|` for a node `v` strictly inside the source path, whose
/// path neighbors are `prev` and `next`.
pub(crate) fn interior_size(table: &SubtreeTable, prev: NodeId, v: NodeId, next: NodeId) -> usize {
    table.n - table.size(prev, v) - table.size(next, v)
}

/// Fills `memo` for every span of `path` (a tree path) and returns the entry
/// of the full span.
pub(crate) fn fill_path_spans(table: &SubtreeTable, path: &[NodeId], memo: &mut PairScoreTable) -> PairEntry {
    let d = path.len() - 1;
    let inner: Vec<usize> = (0..=d)
        .map(|i| {
            if i == 0 || i == d {
                0
            } else {
                interior_size(table, path[i - 1], path[i], path[i + 1])
            }
        })
        .collect();
    for len in 1..=d {
        for a in 0..=(d - len) {
            let b = a + len;
            if memo.get(path[a], path[b]).is_some() {
                continue;
            }
            let entry = span_entry(memo, path[a], path[a + 1], path[b - 1], path[b], len, inner[b - 1]);
            memo.insert(path[a], path[b], entry);
        }
    }
    memo.get(path[0], path[d]).expect("filled")
}

/// One step of the span recursion for the path `(s1, u_1, .., u_last, s2)` of
/// length `len`, given the sub-spans `(u_1 .. s2)` and `(s1 .. u_last)`
/// already in the memo. `last_size` is `|T_{u_last}(s1, s2)|`.
pub(crate) fn span_entry(
    memo: &PairScoreTable,
    s1: NodeId,
    u_first: NodeId,
    u_last: NodeId,
    s2: NodeId,
    len: usize,
    last_size: usize,
) -> PairEntry {
    match len {
        1 => PairEntry {
            log_q: 0.0,
            path_size: 0,
        },
        2 => PairEntry {
            log_q: -(last_size as f64).ln(),
            path_size: last_size,
        },
        _ => {
            let right = memo.get(u_first, s2).expect("shorter span computed first");
            let left = memo.get(s1, u_last).expect("shorter span computed first");
            let path_size = left.path_size + last_size;
            PairEntry {
                log_q: log_add_exp(right.log_q, left.log_q) - (path_size as f64).ln(),
                path_size,
            }
        }
    }
}

/// `ln prod_{u off the path} |T_u(s1, s2)|`, summed per path node over its
/// off-path neighbors.
pub(crate) fn off_path_log_product(table: &SubtreeTable, path: &[NodeId]) -> f64 {
    let d = path.len() - 1;
    let mut total = 0.0;
    for (i, &w) in path.iter().enumerate() {
        total += table.log_g_into(w);
        if i > 0 {
            total -= table.log_g(path[i - 1], w);
        }
        if i < d {
            total -= table.log_g(path[i + 1], w);
        }
    }
    total
}

/// `ln C(s1, s2)` on the tree `g`.
pub fn pair_count(
    g: &Graph,
    s1: NodeId,
    s2: NodeId,
    table: &SubtreeTable,
    memo: &mut PairScoreTable,
) -> Result<LogCount> {
    if s1 == s2 {
        return arg("the two sources must differ");
    }
    if !g.is_tree() {
        return not_a_tree();
    }
    if s1 >= g.node_count() || s2 >= g.node_count() || table.node_count() != g.node_count() {
        return arg("source outside the tree");
    }
    let path = tree_path(g, s1, s2);
    let entry = fill_path_spans(table, &path, memo);
    let n = g.node_count();
    Ok(LogCount(
        ln_factorial(n - 2) + entry.log_q - off_path_log_product(table, &path),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, edges.iter().copied()).unwrap()
    }

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).unwrap()
    }

    #[test]
    fn validate_examples() {
        let p = path(3);
        let s = NodeSet::new([0]);
        assert!(validate_sequence(&p, &s, &[]).unwrap());
        assert!(!validate_sequence(&p, &s, &[2, 1]).unwrap());
        assert!(validate_sequence(&p, &s, &[1, 2]).unwrap());
        assert!(validate_sequence(&p, &s, &[1, 1]).is_err());
        assert!(validate_sequence(&p, &s, &[0]).is_err());
    }

    #[test]
    fn probability_examples() {
        let p = path(3);
        assert_eq!(sequence_probability(&p, &NodeSet::new([0]), &[1, 2]).unwrap(), 1.0);
        let st = star(3);
        let src = NodeSet::new([0]);
        for order in [[1, 2, 3], [3, 1, 2], [2, 3, 1]] {
            let pr = sequence_probability(&st, &src, &order).unwrap();
            assert!((pr - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!(sequence_probability(&p, &NodeSet::new([0]), &[2, 1]).is_err());
        let lp = sequence_log_probability(&st, &src, &[1, 2, 3]).unwrap();
        assert!((lp - (1.0f64 / 6.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_sequences(&path(3), &NodeSet::new([1])).unwrap(), 2);
        assert_eq!(enumerate_sequences(&path(4), &NodeSet::new([0, 3])).unwrap(), 2);
        assert_eq!(enumerate_sequences(&star(3), &NodeSet::new([0])).unwrap(), 6);
        let all = list_sequences(&path(3), &NodeSet::new([1])).unwrap();
        assert_eq!(all, vec![vec![0, 2], vec![2, 0]]);
        assert!(matches!(
            enumerate_sequences(&path(14), &NodeSet::new([0])),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn table_examples() {
        let t = tree_tables(&path(3), 0).unwrap();
        assert_eq!(t.size(0, 1), 1);
        assert_eq!(t.size(1, 0), 2);
        assert!((t.log_g(1, 0) - 2f64.ln()).abs() < 1e-15);

        let t = tree_tables(&path(2), 1).unwrap();
        assert_eq!((t.size(0, 1), t.size(1, 0)), (1, 1));
        assert_eq!((t.log_g(0, 1), t.log_g(1, 0)), (0.0, 0.0));

        let t = tree_tables(&star(3), 2).unwrap();
        assert_eq!(t.size(0, 1), 3);
        assert!((t.log_g(0, 1) - 3f64.ln()).abs() < 1e-15);

        assert!(matches!(
            tree_tables(&g(3, &[(0, 1), (1, 2), (2, 0)]), 0),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn single_source_examples() {
        let p = path(3);
        let t = tree_tables(&p, 0).unwrap();
        let c = single_source_count(&p, 1, &t).unwrap();
        assert!((c.ln() - 2f64.ln()).abs() < 1e-12);
        let st = star(3);
        let t = tree_tables(&st, 0).unwrap();
        assert!((single_source_count(&st, 0, &t).unwrap().ln() - 6f64.ln()).abs() < 1e-12);
        assert!((single_source_count(&st, 1, &t).unwrap().ln() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn pair_examples() {
        let p = path(4);
        let t = tree_tables(&p, 0).unwrap();
        let mut memo = PairScoreTable::new(4);
        let c = pair_count(&p, 0, 3, &t, &mut memo).unwrap();
        assert!((c.ln() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(memo.get(1, 2).unwrap().log_q, -(1f64.ln()));
        assert!(memo.get(3, 0).unwrap().log_q.abs() < 1e-15);

        let e = path(2);
        let t = tree_tables(&e, 0).unwrap();
        let mut memo = PairScoreTable::new(2);
        assert_eq!(pair_count(&e, 0, 1, &t, &mut memo).unwrap().ln(), 0.0);
        assert!(pair_count(&e, 1, 1, &t, &mut memo).is_err());
    }

    #[test]
    fn prefix_sum_examples() {
        // subtree sizes along the reverse sequence (u2, u1, u3) are (1, 3, 2)
        assert_eq!(prefix_sums(&[1, 3, 2]).unwrap(), vec![1, 4, 6]);
        assert_eq!(descending_prefix_sums(&[1, 3, 2]).unwrap(), vec![3, 5, 6]);
        assert_eq!(descending_prefix_sums(&[5]).unwrap(), vec![5]);
        assert_eq!(descending_prefix_sums(&[2, 2, 2]).unwrap(), vec![2, 4, 6]);
        assert!(descending_prefix_sums(&[]).is_err());
    }

    #[test]
    fn partition_weight_examples() {
        let h = path(4);
        let s = NodeSet::new([0, 3]);
        let split = |cut: usize| {
            let m = (0..4).map(|v| (v, if v < cut { 0 } else { 1 })).collect();
            Partition::new(vec![0, 3], m).unwrap()
        };
        let w = partition_weight(&h, &s, &split(2)).unwrap();
        assert!((w.exp() - 1.0).abs() < 1e-12);
        let w = partition_weight(&h, &s, &split(3)).unwrap();
        assert!((w.exp() - 0.5).abs() < 1e-12);

        let e = path(2);
        let m = [(0, 0), (1, 1)].into_iter().collect();
        let w = partition_weight(&e, &NodeSet::new([0, 1]), &Partition::new(vec![0, 1], m).unwrap()).unwrap();
        assert_eq!(w.exp(), 1.0);

        // disconnected color class
        let m = [(0, 0), (1, 1), (2, 0), (3, 1)].into_iter().collect();
        let bad = Partition::new(vec![0, 3], m).unwrap();
        assert!(partition_weight(&h, &s, &bad).is_err());
    }
}

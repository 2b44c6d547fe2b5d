//! Synthetic network families: regular trees, geometric trees and
//! Watts-Strogatz small-world graphs.

use std::collections::BTreeSet;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RegularTree,
    GeometricTree,
    SmallWorld,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::RegularTree => "regular-tree",
            Family::GeometricTree => "geometric-tree",
            Family::SmallWorld => "small-world",
        }
    }
}

/// Parameters of the synthetic network generators. Fields that a family does
/// not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub family: Family,
    /// Node degree of a regular tree; lattice degree `k` of a small world.
    pub degree: usize,
    /// Root degree bounds of a geometric tree.
    pub d_min: usize,
    pub d_max: usize,
    /// Depth of a regular or geometric tree.
    pub depth: usize,
    /// Node count of a small world.
    pub nodes: usize,
    /// Growth exponent and constants of the geometric-tree level sizes.
    pub alpha: f64,
    pub b: f64,
    pub c: f64,
    /// Small-world rewiring probability.
    pub rewire_p: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            family: Family::GeometricTree,
            degree: 3,
            d_min: 7,
            d_max: 7,
            depth: 10,
            nodes: 1000,
            alpha: 1.0,
            b: 1.0,
            c: 1.0,
            rewire_p: 0.1,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha <= 0.0 || !self.alpha.is_finite() {
            return arg(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.b > self.c {
            return arg(format!("b ({}) must not exceed c ({})", self.b, self.c));
        }
        if self.b < 0.0 {
            return arg("growth constants must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.rewire_p) {
            return arg(format!("rewiring probability {} outside [0, 1]", self.rewire_p));
        }
        Ok(())
    }
}

/// Generates a graph of the requested family.
pub fn generate(params: &GenParams) -> Result<Graph> {
    params.validate()?;
    match params.family {
        Family::RegularTree => gen_regular_tree(params.degree, params.depth),
        Family::GeometricTree => gen_geometric_tree(params).map(|t| t.graph),
        Family::SmallWorld => gen_small_world(params.nodes, params.degree, params.rewire_p, params.seed),
    }
}

/// Regular tree rooted at node 0: every internal node has `degree`
/// neighbors and all leaves sit at distance `depth` from the root. Node ids
/// are assigned in BFS order.
pub fn gen_regular_tree(degree: usize, depth: usize) -> Result<Graph> {
    if degree < 2 {
        return arg(format!("regular tree degree must be at least 2, got {degree}"));
    }
    if depth < 1 {
        return arg("regular tree depth must be at least 1");
    }
    let mut edges = Vec::new();
    let mut level = vec![0usize];
    let mut next_id = 1usize;
    for d in 0..depth {
        let fanout = if d == 0 { degree } else { degree - 1 };
        let mut next = Vec::with_capacity(level.len() * fanout);
        for &p in &level {
            for _ in 0..fanout {
                edges.push((p, next_id));
                next.push(next_id);
                next_id += 1;
            }
        }
        level = next;
    }
    Graph::from_edges(next_id, edges)
}

/// A generated geometric tree together with its level structure.
#[derive(Debug, Clone)]
pub struct GeometricTree {
    pub graph: Graph,
    pub root: NodeId,
    /// Children of the root, one per grown subtree.
    pub root_children: Vec<NodeId>,
}

fn level_bounds(alpha: f64, b: f64, c: f64, r: usize) -> (usize, usize) {
    let x = (r as f64).powf(alpha);
    ((b * x).round() as usize, (c * x).round() as usize)
}

/// Geometric tree: the root (node 0) gets a degree drawn uniformly from
/// `[d_min, d_max]`; below each root child `u`, the number of nodes at
/// distance `r` from `u` is drawn uniformly from
/// `[round(b r^alpha), round(c r^alpha)]` for `1 <= r <= depth - 1`, and each
/// level is attached round-robin to the level above. Non-root nodes have at
/// most `d_max` neighbors.
pub fn gen_geometric_tree(params: &GenParams) -> Result<GeometricTree> {
    params.validate()?;
    if params.depth < 1 {
        return arg("geometric tree depth must be at least 1");
    }
    if params.d_min < 1 || params.d_min > params.d_max {
        return arg(format!(
            "root degree bounds [{}, {}] are invalid",
            params.d_min, params.d_max
        ));
    }
    let max_children = params.d_max.saturating_sub(1).max(1);
    let mut rng = seeding::rng(params.seed);
    let root_degree = rng.random_range(params.d_min..=params.d_max);
    let mut edges = Vec::new();
    let mut next_id = 1usize;
    let mut root_children = Vec::with_capacity(root_degree);
    for _ in 0..root_degree {
        let u = next_id;
        next_id += 1;
        edges.push((0, u));
        root_children.push(u);
        let mut level = vec![u];
        for r in 1..params.depth {
            let (lo, hi) = level_bounds(params.alpha, params.b, params.c, r);
            let size = rng.random_range(lo..=hi);
            if size > level.len() * max_children {
                return Err(Error::Generation {
                    level: r,
                    msg: format!(
                        "{} parents at level {} cannot hold {} children with at most {} each",
                        level.len(),
                        r - 1,
                        size,
                        max_children
                    ),
                });
            }
            let mut next = Vec::with_capacity(size);
            for i in 0..size {
                edges.push((level[i % level.len()], next_id));
                next.push(next_id);
                next_id += 1;
            }
            level = next;
        }
    }
    let graph = Graph::from_edges(next_id, edges)?;
    Ok(GeometricTree {
        graph,
        root: 0,
        root_children,
    })
}

/// Result of checking the polynomial-growth condition below one root child.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelViolation {
    pub child: NodeId,
    pub r: usize,
    pub count: usize,
    pub bounds: (usize, usize),
}

/// Counts, for every neighbor `u` of `root`, the nodes of `u`'s subtree at
/// distance `r` from `u` and reports every level outside
/// `[round(b r^alpha), round(c r^alpha)]` for `1 <= r <= depth - 1`.
pub fn audit_geometric(
    g: &Graph,
    root: NodeId,
    alpha: f64,
    b: f64,
    c: f64,
    depth: usize,
) -> Vec<LevelViolation> {
    let mut violations = Vec::new();
    for &u in g.neighbors(root) {
        let mut counts = vec![0usize; depth.max(1)];
        let mut stack = vec![(u, root, 0usize)];
        while let Some((v, parent, r)) = stack.pop() {
            if r < counts.len() {
                counts[r] += 1;
            }
            for &w in g.neighbors(v) {
                if w != parent {
                    stack.push((w, v, r + 1));
                }
            }
        }
        for (r, &count) in counts.iter().enumerate().skip(1) {
            let bounds = level_bounds(alpha, b, c, r);
            if count < bounds.0 || count > bounds.1 {
                violations.push(LevelViolation {
                    child: u,
                    r,
                    count,
                    bounds,
                });
            }
        }
    }
    violations
}

/// Watts-Strogatz small world: a ring where each node links to its `k`
/// nearest neighbors, after which every lattice edge `(u, u + j)` is rewired
/// with probability `p` to a uniformly chosen new endpoint, never creating
/// self-loops or duplicate edges.
pub fn gen_small_world(n: usize, k: usize, p: f64, seed: u64) -> Result<Graph> {
    if k % 2 == 1 || k >= n {
        return arg(format!("small world needs even k < n, got k = {k}, n = {n}"));
    }
    if !(0.0..=1.0).contains(&p) {
        return arg(format!("rewiring probability {p} outside [0, 1]"));
    }
    let mut adj: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    let mut rng = seeding::rng(seed);
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if !rng.random_bool(p) {
                continue;
            }
            // a node adjacent to everyone cannot be rewired
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            if adj[u].remove(&v) {
                adj[v].remove(&u);
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
    }
    let edges: Vec<(NodeId, NodeId)> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, s)| s.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
        .collect();
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric_and_simple(g: &Graph) -> bool {
        (0..g.node_count()).all(|u| {
            let nb = g.neighbors(u);
            nb.windows(2).all(|w| w[0] < w[1])
                && nb.iter().all(|&v| v != u && g.has_edge(v, u))
        })
    }

    #[test]
    fn regular_tree_shapes() {
        let p = gen_regular_tree(2, 3).unwrap();
        assert_eq!(p.node_count(), 7);
        assert!(p.is_tree());
        assert_eq!(p.max_degree(), 2);

        let star = gen_regular_tree(3, 1).unwrap();
        assert_eq!(star.node_count(), 4);
        assert_eq!(star.degree(0), 3);

        let t = gen_regular_tree(3, 2).unwrap();
        assert_eq!(t.node_count(), 10);
        for d in 3..6usize {
            for depth in 1..5u32 {
                let t = gen_regular_tree(d, depth as usize).unwrap();
                let expected = 1 + d * ((d - 1).pow(depth) - 1) / (d - 2);
                assert_eq!(t.node_count(), expected);
                let dist = t.hop_distances(0);
                for v in 0..t.node_count() {
                    if dist[v] < depth as usize {
                        assert_eq!(t.degree(v), d);
                    } else {
                        assert_eq!(t.degree(v), 1);
                    }
                }
            }
        }
        assert!(gen_regular_tree(1, 3).is_err());
    }

    #[test]
    fn geometric_exact_levels() {
        let params = GenParams {
            alpha: 1.0,
            b: 2.0,
            c: 2.0,
            depth: 3,
            d_min: 3,
            d_max: 3,
            ..GenParams::default()
        };
        let t = gen_geometric_tree(&params).unwrap();
        assert!(t.graph.is_tree());
        let dist = t.graph.hop_distances(0);
        for &u in &t.root_children {
            let du = t.graph.hop_distances(u);
            let at = |r: usize| {
                (0..t.graph.node_count())
                    .filter(|&v| du[v] == r && dist[v] == r + 1)
                    .count()
            };
            assert_eq!(at(1), 2);
            assert_eq!(at(2), 4);
        }
    }

    #[test]
    fn geometric_audit_passes() {
        let params = GenParams {
            alpha: 1.0,
            b: 1.0,
            c: 2.0,
            depth: 4,
            d_min: 3,
            d_max: 5,
            seed: 7,
            ..GenParams::default()
        };
        let t = gen_geometric_tree(&params).unwrap();
        assert!(audit_geometric(&t.graph, 0, 1.0, 1.0, 2.0, 4).is_empty());
        let flagged = audit_geometric(&t.graph, 0, 1.0, 10.0, 10.0, 4);
        assert_eq!(flagged.len(), 3 * t.root_children.len());
    }

    #[test]
    fn geometric_rejects_bad_params() {
        let params = GenParams {
            alpha: 0.5,
            b: 2.0,
            c: 1.0,
            ..GenParams::default()
        };
        assert!(matches!(gen_geometric_tree(&params), Err(Error::Argument(_))));

        let params = GenParams {
            alpha: 2.0,
            b: 5.0,
            c: 5.0,
            d_max: 2,
            d_min: 2,
            depth: 4,
            ..GenParams::default()
        };
        assert!(matches!(
            gen_geometric_tree(&params),
            Err(Error::Generation { level: 1, .. })
        ));
    }

    #[test]
    fn small_world_lattice() {
        let g = gen_small_world(6, 2, 0.0, 1).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!((0..6).all(|v| g.degree(v) == 2));
        assert!(g.is_connected());

        let g = gen_small_world(6, 4, 0.0, 1).unwrap();
        assert!((0..6).all(|v| g.degree(v) == 4));

        let a = gen_small_world(50, 4, 0.1, 99).unwrap();
        let b = gen_small_world(50, 4, 0.1, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edge_count(), 100);
        assert!(symmetric_and_simple(&a));

        assert!(gen_small_world(6, 3, 0.1, 1).is_err());
        assert!(gen_small_world(4, 4, 0.1, 1).is_err());
    }

    #[test]
    fn generated_graphs_are_simple() {
        for seed in 0..20 {
            let sw = gen_small_world(40, 6, 0.3, seed).unwrap();
            assert!(symmetric_and_simple(&sw));
            let geo = gen_geometric_tree(&GenParams {
                seed,
                b: 1.0,
                c: 2.0,
                depth: 6,
                d_min: 3,
                d_max: 6,
                ..GenParams::default()
            })
            .unwrap();
            assert!(symmetric_and_simple(&geo.graph));
            assert!(geo.graph.is_tree());
        }
    }
}

//! Undirected simple graphs over dense node ids, traversal helpers and the
//! edge-list text format.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

pub type NodeId = usize;

/// Marker used in distance vectors for nodes outside the searched component.
pub const UNREACHED: usize = usize::MAX;

/// Immutable undirected graph stored in compressed adjacency form.
///
/// Neighbor lists are sorted ascending, contain no duplicates and no
/// self-loops, and every edge appears in both endpoint lists.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("nodes", &self.node_count())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) are collapsed; self-loops and out-of-range ids are rejected.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut pairs = Vec::new();
        for (u, v) in edges {
            if u == v {
                return arg(format!("self-loop on node {u}"));
            }
            if u >= node_count || v >= node_count {
                return arg(format!("edge ({u}, {v}) out of range for {node_count} nodes"));
            }
            pairs.push((u, v));
            pairs.push((v, u));
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0usize; node_count + 1];
        for &(u, _) in &pairs {
            offsets[u + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.into_iter().map(|(_, v)| v).collect();
        Ok(Graph { offsets, targets })
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Graph {
        Graph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Position of `v` inside the neighbor list of `u`.
    pub fn neighbor_index(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.neighbors(u).binary_search(&v).ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v < self.node_count()
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            arg(format!("node {v} out of range ({} nodes)", self.node_count()))
        }
    }

    /// BFS hop distances from `root`, `UNREACHED` for nodes in other components.
    pub fn hop_distances(&self, root: NodeId) -> Vec<usize> {
        let mut dist = vec![UNREACHED; self.node_count()];
        let mut queue = VecDeque::new();
        dist[root] = 0;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if dist[v] == UNREACHED {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Hop distances from `root` to every node of its component.
    pub fn distances_from(&self, root: NodeId) -> Result<BTreeMap<NodeId, usize>> {
        self.check_node(root)?;
        Ok(self
            .hop_distances(root)
            .into_iter()
            .enumerate()
            .filter(|&(_, d)| d != UNREACHED)
            .collect())
    }

    /// Breadth-first spanning tree of the component of `root`. Neighbors are
    /// explored in ascending id order.
    pub fn bfs_tree(&self, root: NodeId) -> Result<BfsTree> {
        self.check_node(root)?;
        let n = self.node_count();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        seen[root] = true;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        let tree = Graph::from_edges(
            n,
            parent
                .iter()
                .enumerate()
                .filter_map(|(v, p)| p.map(|p| (p, v))),
        )?;
        Ok(BfsTree {
            root,
            tree,
            order,
            parent,
        })
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        n == 0 || self.hop_distances(0).iter().all(|&d| d != UNREACHED)
    }

    pub fn is_tree(&self) -> bool {
        let n = self.node_count();
        n > 0 && self.edge_count() == n - 1 && self.is_connected()
    }

    /// Subgraph induced by `nodes`, relabelled to `0..nodes.len()` in the order
    /// given. Returns the subgraph and the local-to-original id table.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> (Graph, Vec<NodeId>) {
        let local: HashMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for (i, &u) in nodes.iter().enumerate() {
            for &v in self.neighbors(u) {
                if let Some(&j) = local.get(&v) {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        let g = Graph::from_edges(nodes.len(), edges).expect("induced edges are valid");
        (g, nodes.to_vec())
    }

    /// Largest hop distance between two nodes. Uses a double sweep on trees
    /// and all-sources BFS otherwise. Disconnected graphs report the largest
    /// finite distance.
    pub fn diameter(&self) -> usize {
        let n = self.node_count();
        if n == 0 {
            return 0;
        }
        let far = |d: &[usize]| {
            d.iter()
                .enumerate()
                .filter(|&(_, &x)| x != UNREACHED)
                .max_by_key(|&(i, &x)| (x, std::cmp::Reverse(i)))
                .map(|(i, &x)| (i, x))
                .unwrap()
        };
        if self.is_tree() {
            let (a, _) = far(&self.hop_distances(0));
            return far(&self.hop_distances(a)).1;
        }
        (0..n).map(|v| far(&self.hop_distances(v)).1).max().unwrap()
    }

    /// Writes the graph as an edge list, one `u v` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# nodes {} edges {}", self.node_count(), self.edge_count())?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }
}

/// Output of [`Graph::bfs_tree`].
#[derive(Debug, Clone)]
pub struct BfsTree {
    pub root: NodeId,
    /// Spanning tree over the same id space as the source graph; nodes outside
    /// the root's component are isolated.
    pub tree: Graph,
    /// BFS visit sequence starting with the root.
    pub order: Vec<NodeId>,
    pub parent: Vec<Option<NodeId>>,
}

/// Strictly ascending set of node ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new<I: IntoIterator<Item = NodeId>>(nodes: I) -> NodeSet {
        let mut v: Vec<NodeId> = nodes.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    /// Checks that every member is a node of `g`.
    pub fn check_within(&self, g: &Graph) -> Result<()> {
        match self.0.iter().find(|&&v| v >= g.node_count()) {
            Some(v) => arg(format!("node {v} outside graph of {} nodes", g.node_count())),
            None => Ok(()),
        }
    }

    pub fn into_vec(self) -> Vec<NodeId> {
        self.0
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        NodeSet::new(iter)
    }
}

fn parse_lines<R: BufRead>(input: R) -> Result<Vec<(u64, u64)>> {
    let mut edges = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected two node ids, found {} fields", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid node id {s:?}"),
            })
        };
        let (u, v) = (parse(fields[0])?, parse(fields[1])?);
        if u == v {
            return Err(Error::SelfLoop { line: lineno });
        }
        edges.push((u, v));
    }
    Ok(edges)
}

/// Reads an edge list. Node ids are used as given, so `node_count` is the
/// largest id plus one.
pub fn load_edge_list<R: BufRead>(input: R) -> Result<Graph> {
    let edges = parse_lines(input)?;
    let n = edges
        .iter()
        .map(|&(u, v)| u.max(v) as usize + 1)
        .max()
        .unwrap_or(0);
    Graph::from_edges(n, edges.into_iter().map(|(u, v)| (u as usize, v as usize)))
}

/// Reads an edge list with arbitrary (sparse) ids and relabels them densely in
/// ascending order. Returns the graph and the dense-to-original id table.
pub fn load_edge_list_remapped<R: BufRead>(input: R) -> Result<(Graph, Vec<u64>)> {
    let edges = parse_lines(input)?;
    let mut ids: Vec<u64> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let dense = |x: u64| ids.binary_search(&x).unwrap();
    let g = Graph::from_edges(ids.len(), edges.iter().map(|&(u, v)| (dense(u), dense(v))))?;
    Ok((g, ids))
}

//! Infection partitions and the hop-distance Voronoi partition.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{arg, not_connected, Result};
use crate::graph::{Graph, NodeId, UNREACHED};

/// Assignment of nodes to regions. Region `i` is centered at `centers[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    centers: Vec<NodeId>,
    region_of: BTreeMap<NodeId, usize>,
}

impl Partition {
    /// Builds a partition, checking that every center is assigned to its own
    /// region and that region indices are in range.
    pub fn new(centers: Vec<NodeId>, region_of: BTreeMap<NodeId, usize>) -> Result<Partition> {
        for (i, &c) in centers.iter().enumerate() {
            if region_of.get(&c) != Some(&i) {
                return arg(format!("center {c} is not inside region {i}"));
            }
        }
        if let Some((v, r)) = region_of.iter().find(|&(_, &r)| r >= centers.len()) {
            return arg(format!("node {v} assigned to missing region {r}"));
        }
        Ok(Partition { centers, region_of })
    }

    /// Single region covering `nodes`.
    pub fn whole(center: NodeId, nodes: impl IntoIterator<Item = NodeId>) -> Partition {
        let mut region_of: BTreeMap<NodeId, usize> = nodes.into_iter().map(|v| (v, 0)).collect();
        region_of.insert(center, 0);
        Partition {
            centers: vec![center],
            region_of,
        }
    }

    pub fn centers(&self) -> &[NodeId] {
        &self.centers
    }

    pub fn region_count(&self) -> usize {
        self.centers.len()
    }

    pub fn region_of(&self, v: NodeId) -> Option<usize> {
        self.region_of.get(&v).copied()
    }

    pub fn assignment(&self) -> &BTreeMap<NodeId, usize> {
        &self.region_of
    }

    pub fn node_count(&self) -> usize {
        self.region_of.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.region_of.keys().copied()
    }

    /// Members of each region, ascending.
    pub fn regions(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.centers.len()];
        for (&v, &r) in &self.region_of {
            out[r].push(v);
        }
        out
    }

    /// True when each region induces a connected subgraph of `g`.
    pub fn regions_connected(&self, g: &Graph) -> bool {
        self.regions().iter().enumerate().all(|(i, members)| {
            let mut seen = BTreeMap::new();
            let mut stack = vec![self.centers[i]];
            seen.insert(self.centers[i], ());
            while let Some(u) = stack.pop() {
                for &v in g.neighbors(u) {
                    if self.region_of(v) == Some(i) && seen.insert(v, ()).is_none() {
                        stack.push(v);
                    }
                }
            }
            seen.len() == members.len()
        })
    }

    /// True when every node is no farther from its own center than from any
    /// other center.
    pub fn is_voronoi(&self, g: &Graph) -> bool {
        let dists: Vec<Vec<usize>> = self.centers.iter().map(|&c| g.hop_distances(c)).collect();
        self.region_of.iter().all(|(&v, &r)| {
            let own = dists[r][v];
            own != UNREACHED && dists.iter().all(|d| own <= d[v])
        })
    }
}

/// Multi-source BFS partition: every node joins its nearest center; among
/// equally near centers the one listed first wins.
pub fn voronoi_partition(g: &Graph, centers: &[NodeId]) -> Result<Partition> {
    if centers.is_empty() {
        return arg("at least one center is required");
    }
    let n = g.node_count();
    let mut dist = vec![UNREACHED; n];
    let mut region = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for (i, &c) in centers.iter().enumerate() {
        if c >= n {
            return arg(format!("center {c} outside graph of {n} nodes"));
        }
        if dist[c] != UNREACHED {
            return arg(format!("center {c} listed twice"));
        }
        dist[c] = 0;
        region[c] = i;
        queue.push_back(c);
    }
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v] == UNREACHED {
                dist[v] = dist[u] + 1;
                region[v] = region[u];
                queue.push_back(v);
            } else if dist[v] == dist[u] + 1 && region[u] < region[v] {
                // v is still queued; its region settles before it is expanded
                region[v] = region[u];
            }
        }
    }
    if dist.iter().any(|&d| d == UNREACHED) {
        return not_connected();
    }
    let region_of = region.into_iter().enumerate().collect();
    Ok(Partition {
        centers: centers.to_vec(),
        region_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn path_tie_goes_to_first_center() {
        let g = Graph::from_edges(5, (1..5).map(|i| (i - 1, i))).unwrap();
        let p = voronoi_partition(&g, &[0, 4]).unwrap();
        assert_eq!(p.regions(), vec![vec![0, 1, 2], vec![3, 4]]);
        let p = voronoi_partition(&g, &[4, 0]).unwrap();
        assert_eq!(p.regions(), vec![vec![2, 3, 4], vec![0, 1]]);
    }

    #[test]
    fn single_center_whole_graph() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let p = voronoi_partition(&g, &[2]).unwrap();
        assert_eq!(p.regions(), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn star_with_leaf_centers() {
        let g = Graph::from_edges(5, (1..5).map(|i| (0, i))).unwrap();
        let p = voronoi_partition(&g, &[1, 2]).unwrap();
        assert_eq!(p.regions(), vec![vec![0, 1, 3, 4], vec![2]]);
        assert!(p.regions_connected(&g));
        assert!(p.is_voronoi(&g));
    }

    #[test]
    fn rejects_bad_centers() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(voronoi_partition(&g, &[5]).is_err());
        assert!(voronoi_partition(&g, &[1, 1]).is_err());
        assert!(voronoi_partition(&g, &[]).is_err());
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(voronoi_partition(&split, &[0]), Err(Error::Structure(_))));
    }

    #[test]
    fn partition_validation() {
        let mut m = BTreeMap::new();
        m.insert(0, 0);
        m.insert(1, 1);
        assert!(Partition::new(vec![0, 1], m.clone()).is_ok());
        assert!(Partition::new(vec![1, 0], m.clone()).is_err());
        m.insert(2, 5);
        assert!(Partition::new(vec![0, 1], m).is_err());
    }
}

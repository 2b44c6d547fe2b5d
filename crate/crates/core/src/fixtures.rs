//! Small hand-checkable instances used by the oracle checks, the tests and
//! the command line. None of them needs any external data.

use crate::graph::{Graph, NodeId, NodeSet};

/// Two sources joined through a shared neighbour, with four further nodes.
///
/// Ids: sources `0` and `1`; `3` is adjacent to both sources and carries
/// the two leaves `2` and `5`; `4` hangs off source `0` and `6` off source
/// `1`. The infection sequence `(3, 5)` has probability `2/4 * 1/4 = 1/8`
/// (two of the four open edges lead into `3`, then one of four into `5`).
#[derive(Debug, Clone)]
pub struct TwoSourceExample {
    pub graph: Graph,
    pub sources: NodeSet,
    /// A valid partial infection order.
    pub valid_order: [NodeId; 2],
    /// The same nodes reversed, which is not an infection order.
    pub invalid_order: [NodeId; 2],
    /// Exact probability of `valid_order`.
    pub valid_probability: f64,
}

pub fn two_source_example() -> TwoSourceExample {
    let graph = Graph::from_edges(7, [(0, 3), (0, 4), (1, 3), (1, 6), (3, 5), (3, 2)])
        .expect("static edge list");
    TwoSourceExample {
        graph,
        sources: NodeSet::new([0, 1]),
        valid_order: [3, 5],
        invalid_order: [5, 3],
        valid_probability: 0.125,
    }
}

/// Subtree sizes hanging off a three-node path in an arbitrary reverse
/// order, with the cumulative sizes in that order and in descending order.
#[derive(Debug, Clone, Copy)]
pub struct PathSizesExample {
    pub sizes_in_order: [usize; 3],
    pub cumulative_in_order: [usize; 3],
    pub cumulative_descending: [usize; 3],
}

pub const PATH_SIZES: PathSizesExample = PathSizesExample {
    sizes_in_order: [1, 3, 2],
    cumulative_in_order: [1, 4, 6],
    cumulative_descending: [3, 5, 6],
};

/// Path `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path edges")
}

/// Star with center `0` and leaves `1..=leaves`.
pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).expect("star edges")
}

/// Cycle `0 - 1 - ... - (n-1) - 0`.
pub fn cycle(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle edges")
}

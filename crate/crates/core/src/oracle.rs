//! Self-checks that compare the closed-form counts and the partitioning rule
//! against brute-force enumeration on small random instances.
//!
//! Each check is deterministic given its seed and reports how many cases
//! passed; the first few failures are kept as one-line descriptions.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::counting::{
    enumerate_sequences, partition_weight, pair_count, sequence_probability, single_source_count,
    tree_tables, validate_sequence, PairScoreTable,
};
use crate::error::{Error, Result};
use crate::estimators::tse;
use crate::fixtures::two_source_example;
use crate::graph::{Graph, NodeId, NodeSet};
use crate::logmath::LogCount;
use crate::partition::{voronoi_partition, Partition};
use crate::seeding::{rng, Rng};

/// Relative tolerance when comparing a closed form with an exact count.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

const KEPT_FAILURES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Single-source counts against enumeration, every root of every tree.
    SingleSource,
    /// Two-source counts against enumeration, and the best pair found by
    /// the sweep against the enumerated best pair.
    Pair,
    /// The nearest-source partition reaches the largest partition weight on
    /// two sources joined by a path with pendant subtrees.
    Voronoi,
    /// Step probabilities on the built-in two-source example.
    Probability,
}

impl Check {
    pub const ALL: [Check; 4] = [Check::SingleSource, Check::Pair, Check::Voronoi, Check::Probability];

    pub fn name(self) -> &'static str {
        match self {
            Check::SingleSource => "single-source",
            Check::Pair => "pair",
            Check::Voronoi => "voronoi",
            Check::Probability => "probability",
        }
    }

    /// Number of random instances the check draws by default.
    pub fn default_instances(self) -> usize {
        match self {
            Check::SingleSource => 200,
            Check::Pair => 100,
            Check::Voronoi => 50,
            Check::Probability => 1,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Check> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown check {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub check: Check,
    pub instances: usize,
    pub cases: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl OracleReport {
    fn new(check: Check, instances: usize) -> OracleReport {
        OracleReport {
            check,
            instances,
            cases: 0,
            passed: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < KEPT_FAILURES {
            self.failures.push(describe());
        }
    }

    pub fn all_passed(&self) -> bool {
        self.cases > 0 && self.passed == self.cases
    }
}

/// Runs `check` on `instances` random instances drawn from `seed`.
pub fn run_check(check: Check, instances: usize, seed: u64) -> Result<OracleReport> {
    let mut r = rng(seed);
    let mut report = OracleReport::new(check, instances);
    match check {
        Check::SingleSource => {
            for _ in 0..instances {
                let n = r.random_range(1..=9);
                single_source_case(&random_tree(n, &mut r), &mut report)?;
            }
        }
        Check::Pair => {
            for _ in 0..instances {
                let n = r.random_range(2..=9);
                pair_case(&random_tree(n, &mut r), &mut report)?;
            }
        }
        Check::Voronoi => {
            for _ in 0..instances {
                let (g, sources) = path_with_pendants(11, &mut r);
                voronoi_case(&g, &sources, &mut report)?;
            }
        }
        Check::Probability => probability_case(&mut report)?,
    }
    Ok(report)
}

/// Uniform random recursive tree on `n` nodes with shuffled labels.
pub fn random_tree(n: usize, r: &mut Rng) -> Graph {
    let mut labels: Vec<NodeId> = (0..n).collect();
    labels.shuffle(r);
    let edges: Vec<(NodeId, NodeId)> = (1..n)
        .map(|i| (labels[i], labels[r.random_range(0..i)]))
        .collect();
    Graph::from_edges(n, edges).expect("recursive tree edges")
}

/// Two sources joined by a path, with random pendant subtrees hanging off
/// the path nodes; at most `max_nodes` nodes. Sources are the path ends.
pub fn path_with_pendants(max_nodes: usize, r: &mut Rng) -> (Graph, [NodeId; 2]) {
    let path_len = r.random_range(2..=max_nodes.min(6));
    let total = r.random_range(path_len..=max_nodes);
    let mut edges: Vec<(NodeId, NodeId)> = (1..path_len).map(|i| (i - 1, i)).collect();
    for v in path_len..total {
        edges.push((v, r.random_range(0..v)));
    }
    let g = Graph::from_edges(total, edges).expect("tree edges");
    (g, [0, path_len - 1])
}

fn exact(count: u128) -> LogCount {
    LogCount::from_count(count as f64)
}

fn single_source_case(g: &Graph, report: &mut OracleReport) -> Result<()> {
    let table = tree_tables(g, 0)?;
    for s in 0..g.node_count() {
        let closed = single_source_count(g, s, &table)?;
        let truth = enumerate_sequences(g, &NodeSet::new([s]))?;
        report.record(closed.approx_eq(exact(truth), RELATIVE_TOLERANCE), || {
            format!("n={} root {s}: closed form {} vs {truth}", g.node_count(), closed.exp())
        });
    }
    Ok(())
}

fn pair_case(g: &Graph, report: &mut OracleReport) -> Result<()> {
    let table = tree_tables(g, 0)?;
    let mut memo = PairScoreTable::new(g.node_count());
    let mut best: Option<(u128, (NodeId, NodeId))> = None;
    for a in 0..g.node_count() {
        for b in a + 1..g.node_count() {
            let closed = pair_count(g, a, b, &table, &mut memo)?;
            let truth = enumerate_sequences(g, &NodeSet::new([a, b]))?;
            report.record(closed.approx_eq(exact(truth), RELATIVE_TOLERANCE), || {
                format!("n={} pair ({a},{b}): closed form {} vs {truth}", g.node_count(), closed.exp())
            });
            if best.is_none_or(|(c, _)| truth > c) {
                best = Some((truth, (a, b)));
            }
        }
    }
    let (_, (a, b)) = best.expect("at least two nodes");
    let found = tse(g)?.nodes;
    report.record(found.as_slice() == [a, b], || {
        format!("n={}: sweep chose {:?}, enumeration ({a},{b})", g.node_count(), found.as_slice())
    });
    Ok(())
}

fn voronoi_case(g: &Graph, sources: &[NodeId; 2], report: &mut OracleReport) -> Result<()> {
    let centers = NodeSet::new(sources.iter().copied());
    let voronoi = voronoi_partition(g, sources)?;
    let chosen = partition_weight(g, &centers, &voronoi)?;
    let rest: Vec<NodeId> = (0..g.node_count()).filter(|v| !centers.contains(*v)).collect();
    let mut best = LogCount::ZERO;
    for mask in 0u32..(1 << rest.len()) {
        let mut region_of: BTreeMap<NodeId, usize> = BTreeMap::new();
        region_of.insert(sources[0], 0);
        region_of.insert(sources[1], 1);
        for (i, &v) in rest.iter().enumerate() {
            region_of.insert(v, ((mask >> i) & 1) as usize);
        }
        let coloring = Partition::new(sources.to_vec(), region_of)?;
        if !coloring.regions_connected(g) {
            continue;
        }
        let w = partition_weight(g, &centers, &coloring)?;
        if w.ln() > best.ln() {
            best = w;
        }
    }
    let ok = chosen.approx_eq(best, RELATIVE_TOLERANCE) || chosen.ln() >= best.ln();
    report.record(ok, || {
        format!(
            "n={} sources {sources:?}: nearest-source weight {} below best {}",
            g.node_count(),
            chosen.exp(),
            best.exp()
        )
    });
    Ok(())
}

fn probability_case(report: &mut OracleReport) -> Result<()> {
    let f = two_source_example();
    let p = sequence_probability(&f.graph, &f.sources, &f.valid_order)?;
    report.record(p == f.valid_probability, || {
        format!("probability {p}, expected {}", f.valid_probability)
    });
    let valid = validate_sequence(&f.graph, &f.sources, &f.valid_order)?;
    report.record(valid, || format!("{:?} rejected", f.valid_order));
    let invalid = validate_sequence(&f.graph, &f.sources, &f.invalid_order)?;
    report.record(!invalid, || format!("{:?} accepted", f.invalid_order));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_round_trip_names() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
        assert!("nope".parse::<Check>().is_err());
    }

    #[test]
    fn small_runs_pass() {
        for c in Check::ALL {
            let rep = run_check(c, 5, 3).unwrap();
            assert!(rep.all_passed(), "{rep:?}");
        }
    }

    #[test]
    fn pendant_instances_are_trees_within_budget() {
        let mut r = rng(9);
        for _ in 0..50 {
            let (g, [a, b]) = path_with_pendants(11, &mut r);
            assert!(g.is_tree() && g.node_count() <= 11 && a != b);
        }
    }

    #[test]
    fn reports_are_seed_deterministic() {
        assert_eq!(run_check(Check::Pair, 4, 11).unwrap(), run_check(Check::Pair, 4, 11).unwrap());
    }
}

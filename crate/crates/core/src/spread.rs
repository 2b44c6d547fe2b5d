//! Susceptible-infected spreading from several sources and random source
//! placement.
//!
//! Every edge from an infected to a susceptible node carries an independent
//! rate-1 exponential clock. The next infection therefore travels along a
//! uniformly random edge of the susceptible edge set, and the waiting time is
//! exponential with rate equal to the size of that set. The simulator samples
//! exactly this step law.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng as _;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::graph::{Graph, NodeId, NodeSet, UNREACHED};
use crate::partition::Partition;
use crate::seeding;

/// When to stop spreading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Stop once this many nodes (sources included) are infected.
    Infected(usize),
    /// Stop at this virtual time; infections after it are discarded.
    Time(f64),
}

/// Result of one spreading run.
#[derive(Debug, Clone, PartialEq)]
pub struct InfectionOutcome {
    pub sources: Vec<NodeId>,
    /// Infected nodes by infection time, sources first in the given order.
    pub infected_order: Vec<NodeId>,
    /// Infecting neighbor of every non-source infected node.
    pub parent: BTreeMap<NodeId, NodeId>,
    /// Region `i` holds the nodes whose parent chain ends at `sources[i]`.
    pub true_partition: Partition,
    /// Virtual time of the last infection.
    pub elapsed: f64,
}

#[derive(Serialize, Deserialize)]
struct OutcomeRecord {
    sources: Vec<NodeId>,
    order: Vec<NodeId>,
    parent: BTreeMap<NodeId, NodeId>,
    elapsed: f64,
}

impl InfectionOutcome {
    /// Infected nodes in ascending id order.
    pub fn infected_nodes(&self) -> Vec<NodeId> {
        let mut v = self.infected_order.clone();
        v.sort_unstable();
        v
    }

    /// Subgraph of `g` induced by the infected nodes, relabelled in ascending
    /// id order. Returns the graph and the local-to-original id table.
    pub fn infection_graph(&self, g: &Graph) -> (Graph, Vec<NodeId>) {
        g.induced_subgraph(&self.infected_nodes())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&OutcomeRecord {
            sources: self.sources.clone(),
            order: self.infected_order.clone(),
            parent: self.parent.clone(),
            elapsed: self.elapsed,
        })
        .expect("outcome serializes")
    }

    pub fn from_json(text: &str) -> Result<InfectionOutcome> {
        let rec: OutcomeRecord =
            serde_json::from_str(text).map_err(|e| Error::Argument(format!("bad outcome JSON: {e}")))?;
        let true_partition = partition_from_parents(&rec.sources, &rec.order, &rec.parent)?;
        Ok(InfectionOutcome {
            sources: rec.sources,
            infected_order: rec.order,
            parent: rec.parent,
            true_partition,
            elapsed: rec.elapsed,
        })
    }
}

/// Follows parent pointers from every infected node back to a source.
pub fn partition_from_parents(
    sources: &[NodeId],
    order: &[NodeId],
    parent: &BTreeMap<NodeId, NodeId>,
) -> Result<Partition> {
    let mut region_of: BTreeMap<NodeId, usize> = BTreeMap::new();
    for (i, &s) in sources.iter().enumerate() {
        region_of.insert(s, i);
    }
    for &v in order {
        if region_of.contains_key(&v) {
            continue;
        }
        let p = match parent.get(&v) {
            Some(&p) => p,
            None => return arg(format!("node {v} has no parent")),
        };
        match region_of.get(&p) {
            Some(&r) => {
                region_of.insert(v, r);
            }
            None => return arg(format!("parent {p} of {v} is not infected earlier")),
        }
    }
    Partition::new(sources.to_vec(), region_of)
}

/// Simulates SI spreading from `sources` until `stop_n` nodes are infected.
pub fn simulate_si(g: &Graph, sources: &[NodeId], stop_n: usize, seed: u64) -> Result<InfectionOutcome> {
    simulate(g, sources, StopRule::Infected(stop_n), seed)
}

/// Simulates SI spreading from `sources` under the given stop rule.
pub fn simulate(g: &Graph, sources: &[NodeId], stop: StopRule, seed: u64) -> Result<InfectionOutcome> {
    if sources.is_empty() {
        return arg("at least one source is required");
    }
    let n = g.node_count();
    let mut infected = vec![false; n];
    for &s in sources {
        if s >= n {
            return arg(format!("source {s} outside graph of {n} nodes"));
        }
        if infected[s] {
            return arg(format!("source {s} listed twice"));
        }
        infected[s] = true;
    }
    match stop {
        StopRule::Infected(k) if k < sources.len() => {
            return arg(format!("stop count {k} is below the source count {}", sources.len()))
        }
        StopRule::Time(t) if !(t >= 0.0) => return arg(format!("stop time {t} must be nonnegative")),
        _ => {}
    }

    let mut rng = seeding::rng(seed);
    let mut order: Vec<NodeId> = sources.to_vec();
    let mut parent = BTreeMap::new();
    // Susceptible edge set with lazy deletion: entries whose head got
    // infected are discarded when drawn. `live` counts valid entries.
    let mut frontier: Vec<(NodeId, NodeId)> = Vec::new();
    let mut live = 0usize;
    for &s in sources {
        for &v in g.neighbors(s) {
            if !infected[v] {
                frontier.push((s, v));
                live += 1;
            }
        }
    }
    let mut clock = 0.0f64;
    let mut elapsed = 0.0f64;
    loop {
        if let StopRule::Infected(k) = stop {
            if order.len() >= k {
                break;
            }
        }
        if live == 0 {
            match stop {
                StopRule::Infected(k) => {
                    return arg(format!(
                        "only {} nodes are reachable from the sources, {k} requested",
                        order.len()
                    ))
                }
                StopRule::Time(_) => break,
            }
        }
        let wait = Exp::new(live as f64).expect("positive rate").sample(&mut rng);
        clock += wait;
        if let StopRule::Time(t) = stop {
            if clock > t {
                break;
            }
        }
        let (from, to) = loop {
            let idx = rng.random_range(0..frontier.len());
            let (u, v) = frontier[idx];
            if infected[v] {
                frontier.swap_remove(idx);
            } else {
                break (u, v);
            }
        };
        let mut closed = 0usize;
        infected[to] = true;
        for &w in g.neighbors(to) {
            if infected[w] {
                closed += 1;
            } else {
                frontier.push((to, w));
                live += 1;
            }
        }
        live -= closed;
        order.push(to);
        parent.insert(to, from);
        elapsed = clock;
    }
    let true_partition = partition_from_parents(sources, &order, &parent)?;
    Ok(InfectionOutcome {
        sources: sources.to_vec(),
        infected_order: order,
        parent,
        true_partition,
        elapsed,
    })
}

/// Source placement constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementParams {
    pub k: usize,
    /// Minimum pairwise hop distance between sources.
    pub tau: u32,
    /// Optional maximum pairwise hop distance, keeping sources close enough
    /// for their infection regions to meet.
    pub max_separation: Option<u32>,
    pub max_attempts: usize,
    pub seed: u64,
}

impl PlacementParams {
    pub fn new(k: usize, tau: u32, seed: u64) -> PlacementParams {
        PlacementParams {
            k,
            tau,
            max_separation: None,
            max_attempts: 10_000,
            seed,
        }
    }
}

/// Nodes of the largest connected component, ascending; ties go to the
/// component with the smallest node.
pub fn largest_component(g: &Graph) -> Vec<NodeId> {
    let n = g.node_count();
    let mut comp = vec![usize::MAX; n];
    let mut best: Vec<NodeId> = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut members = vec![start];
        comp[start] = start;
        let mut i = 0;
        while i < members.len() {
            let u = members[i];
            i += 1;
            for &v in g.neighbors(u) {
                if comp[v] == usize::MAX {
                    comp[v] = start;
                    members.push(v);
                }
            }
        }
        if members.len() > best.len() {
            best = members;
        }
    }
    best.sort_unstable();
    best
}

/// Hop distances from `root` up to `limit`; farther nodes are absent.
fn bounded_distances(g: &Graph, root: NodeId, limit: usize) -> BTreeMap<NodeId, usize> {
    let mut dist = BTreeMap::new();
    let mut queue = VecDeque::new();
    dist.insert(root, 0);
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if du == limit {
            continue;
        }
        for &v in g.neighbors(u) {
            if !dist.contains_key(&v) {
                dist.insert(v, du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Draws `k` sources uniformly from the largest component of `g`, rejecting
/// draws that violate the separation constraints.
pub fn pick_sources(g: &Graph, params: &PlacementParams) -> Result<NodeSet> {
    pick_sources_among(g, &largest_component(g), params)
}

/// As [`pick_sources`], drawing from `candidates` only. Distances are
/// measured in `g`.
pub fn pick_sources_among(g: &Graph, candidates: &[NodeId], params: &PlacementParams) -> Result<NodeSet> {
    if params.k == 0 {
        return arg("source count must be at least 1");
    }
    if params.tau < 2 {
        return arg(format!("separation tau must be at least 2, got {}", params.tau));
    }
    if let Some(m) = params.max_separation {
        if m < params.tau {
            return arg(format!("max separation {m} below tau {}", params.tau));
        }
    }
    if candidates.len() < params.k || candidates.iter().any(|&v| v >= g.node_count()) {
        return Err(Error::Placement {
            attempts: 0,
            k: params.k,
            tau: params.tau,
        });
    }
    let mut rng = seeding::rng(params.seed);
    let limit = params.max_separation.unwrap_or(params.tau - 1) as usize;
    for _ in 0..params.max_attempts.max(1) {
        let picks = rand::seq::index::sample(&mut rng, candidates.len(), params.k);
        let chosen: Vec<NodeId> = picks.iter().map(|i| candidates[i]).collect();
        let ok = chosen.iter().enumerate().all(|(i, &a)| {
            let near = bounded_distances(g, a, limit);
            chosen[i + 1..].iter().all(|b| match near.get(b) {
                Some(&d) => d >= params.tau as usize,
                None => params.max_separation.is_none(),
            })
        });
        if ok {
            return Ok(NodeSet::new(chosen));
        }
    }
    Err(Error::Placement {
        attempts: params.max_attempts,
        k: params.k,
        tau: params.tau,
    })
}

/// Greedy max-dispersion seeding: start from `first`, then repeatedly add the
/// node farthest from all chosen nodes (smallest id on ties).
pub fn greedy_dispersion(g: &Graph, first: NodeId, k: usize) -> Vec<NodeId> {
    let mut chosen = vec![first];
    let mut nearest = g.hop_distances(first);
    while chosen.len() < k.min(g.node_count()) {
        let next = (0..g.node_count())
            .filter(|&v| nearest[v] != UNREACHED && !chosen.contains(&v))
            .max_by_key(|&v| (nearest[v], std::cmp::Reverse(v)));
        let Some(v) = next else { break };
        chosen.push(v);
        for (w, d) in g.hop_distances(v).into_iter().enumerate() {
            nearest[w] = nearest[w].min(d);
        }
    }
    chosen
}

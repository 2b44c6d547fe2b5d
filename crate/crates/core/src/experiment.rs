//! Monte Carlo experiments: build an instance (graph, planted sources, SI
//! spread), run the configured estimators on the infection graph, and score
//! them against the ground truth.
//!
//! Every run draws its randomness from `run_seed(master, run)`; independent
//! streams inside a run come from [`stream_seed`] with the fixed tags below,
//! so results do not depend on how runs are scheduled across threads.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::estimators::{geometric_tse, nsse, sse_bfs, sse_tree, tse, Algo, SourceEstimate};
use crate::generators::{gen_geometric_tree, gen_regular_tree, gen_small_world, Family, GenParams};
use crate::graph::{Graph, NodeId};
use crate::metrics::{error_distance_with, match_sources, region_covering};
use crate::msep::{msep, msep_bfs, MsepConfig, PairScorer};
use crate::partition::Partition;
use crate::seeding::{rng, run_seed, stream_seed};
use crate::spread::{largest_component, pick_sources_among, simulate_si, InfectionOutcome, PlacementParams};

const TAG_GRAPH: u64 = 1;
const TAG_PLACEMENT: u64 = 2;
const TAG_SPREAD: u64 = 3;
const TAG_MSEP: u64 = 4;
const TAG_GUESS: u64 = 5;

/// Spreading runs whose infected set is disconnected are redrawn this many
/// times before the run is recorded as failed.
const SPREAD_ATTEMPTS: u64 = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub gen: GenParams,
    /// True number of sources.
    pub k_true: usize,
    /// Spreading stops once this many nodes are infected.
    pub stop_n: usize,
    pub runs: usize,
    pub k_max: usize,
    /// Minimum hop distance between true sources, and the MSEP merge threshold.
    pub tau: u32,
    /// Maximum hop distance between true sources (regular trees and
    /// small-world graphs).
    pub max_separation: Option<u32>,
    /// Sources are drawn within this many hops of node 0 (regular trees and
    /// small-world graphs); `None` allows every node.
    pub source_radius: Option<u32>,
    /// Geometric trees: each planted source roots its own geometric tree,
    /// and trees are joined by an edge between nodes at depth
    /// `1..=join_depth` below their sources.
    pub join_depth: usize,
    /// Q-factor parameter. When set, MSEP scores region pairs with the
    /// geometric-tree estimator and `geo-tse` uses it.
    pub delta: Option<f64>,
    pub seed: u64,
    pub algos: Vec<Algo>,
    /// Worker threads; 0 or 1 runs sequentially.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            gen: GenParams {
                depth: 30,
                ..GenParams::default()
            },
            k_true: 2,
            stop_n: 500,
            runs: 10,
            k_max: 3,
            tau: 2,
            max_separation: None,
            source_radius: None,
            join_depth: 2,
            delta: Some(1.0),
            seed: 1,
            algos: vec![Algo::Msep, Algo::Nsse, Algo::NsseRandom],
            jobs: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.gen.validate()?;
        if self.runs < 1 {
            return arg("runs must be at least 1");
        }
        if self.k_true < 1 || self.stop_n < self.k_true {
            return arg("need 1 <= k_true <= stop_n");
        }
        if self.k_max < 1 || self.tau < 2 {
            return arg("need k_max >= 1 and tau >= 2");
        }
        if self.algos.is_empty() {
            return arg("no algorithms configured");
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return arg(format!("delta must be positive, got {d}"));
            }
        }
        if self.gen.family == Family::GeometricTree && self.join_depth < 1 {
            return arg("join_depth must be at least 1");
        }
        Ok(())
    }

    fn msep_config(&self, seed: u64) -> MsepConfig {
        MsepConfig {
            k_max: self.k_max,
            tau: self.tau,
            seed,
            pair_scorer: match self.delta {
                Some(delta) => PairScorer::Geometric { delta },
                None => PairScorer::Exact,
            },
            ..MsepConfig::default()
        }
    }
}

/// `k` geometric trees, each rooted at a source, joined into one tree: tree
/// `i > 0` is attached to a uniformly chosen earlier tree by an edge between
/// a node at depth `a` below that tree's source and a node at depth `b` below
/// its own, with `a, b` uniform in `1..=join_depth` and `a + b + 1 >= tau`.
/// Returns the tree and the sources.
pub fn planted_geometric(
    gen: &GenParams,
    k: usize,
    tau: u32,
    join_depth: usize,
    seed: u64,
) -> Result<(Graph, Vec<NodeId>)> {
    if k < 1 || join_depth < 1 {
        return arg("need at least one source and join depth 1");
    }
    if k > 1 && 2 * join_depth + 1 < tau as usize {
        return arg(format!("join depth {join_depth} cannot separate sources by {tau}"));
    }
    let mut edges = Vec::new();
    let mut roots = Vec::with_capacity(k);
    let mut by_depth: Vec<Vec<Vec<NodeId>>> = Vec::with_capacity(k);
    let mut offset = 0;
    for i in 0..k {
        let tree = gen_geometric_tree(&GenParams {
            seed: stream_seed(seed, i as u64),
            ..gen.clone()
        })?;
        let g = &tree.graph;
        edges.extend(g.edges().map(|(u, v)| (u + offset, v + offset)));
        let mut levels: Vec<Vec<NodeId>> = vec![Vec::new(); join_depth + 1];
        for (v, d) in g.hop_distances(tree.root).into_iter().enumerate() {
            if d <= join_depth {
                levels[d].push(v + offset);
            }
        }
        roots.push(tree.root + offset);
        by_depth.push(levels);
        offset += g.node_count();
    }
    let mut r = rng(stream_seed(seed, u64::MAX));
    for i in 1..k {
        let j = r.random_range(0..i);
        let (a, b) = loop {
            let a = r.random_range(1..=join_depth);
            let b = r.random_range(1..=join_depth);
            if a + b + 1 >= tau as usize {
                break (a, b);
            }
        };
        let (la, lb) = (&by_depth[j][a], &by_depth[i][b]);
        if la.is_empty() || lb.is_empty() {
            return Err(Error::Generation {
                level: a.max(b),
                msg: "geometric tree too shallow for the join depth".into(),
            });
        }
        edges.push((la[r.random_range(0..la.len())], lb[r.random_range(0..lb.len())]));
    }
    Ok((Graph::from_edges(offset, edges)?, roots))
}

/// One simulated epidemic, with the infection graph relabelled to
/// `0..stop_n` in ascending original id.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub outcome: InfectionOutcome,
    pub infection_graph: Graph,
    /// Local id -> id in `graph`.
    pub local_to_global: Vec<NodeId>,
    /// True sources in local ids, in the order of the truth partition.
    pub sources: Vec<NodeId>,
    /// True infection regions in local ids.
    pub truth: Partition,
}

/// Graph shared by all runs when the family is deterministic.
fn shared_graph(cfg: &ExperimentConfig) -> Result<Option<Graph>> {
    match cfg.gen.family {
        Family::RegularTree => Ok(Some(gen_regular_tree(cfg.gen.degree, cfg.gen.depth)?)),
        _ => Ok(None),
    }
}

fn candidates(g: &Graph, radius: Option<u32>) -> Vec<NodeId> {
    let component = largest_component(g);
    match radius {
        None => component,
        Some(r) => {
            let root = component[0];
            let d = g.hop_distances(root);
            component.into_iter().filter(|&v| d[v] <= r as usize).collect()
        }
    }
}

/// Builds the instance of run `run`.
pub fn build_instance(cfg: &ExperimentConfig, run: usize) -> Result<Instance> {
    cfg.validate()?;
    let shared = shared_graph(cfg)?;
    build_instance_with(cfg, run, shared.as_ref())
}

fn build_instance_with(cfg: &ExperimentConfig, run: usize, shared: Option<&Graph>) -> Result<Instance> {
    let seed = run_seed(cfg.seed, run as u64);
    let (graph, sources) = match cfg.gen.family {
        Family::GeometricTree => planted_geometric(
            &cfg.gen,
            cfg.k_true,
            cfg.tau,
            cfg.join_depth,
            stream_seed(seed, TAG_GRAPH),
        )?,
        family => {
            let graph = match (family, shared) {
                (Family::RegularTree, Some(g)) => g.clone(),
                (Family::RegularTree, None) => gen_regular_tree(cfg.gen.degree, cfg.gen.depth)?,
                _ => gen_small_world(
                    cfg.gen.nodes,
                    cfg.gen.degree,
                    cfg.gen.rewire_p,
                    stream_seed(seed, TAG_GRAPH),
                )?,
            };
            let params = PlacementParams {
                max_separation: cfg.max_separation,
                ..PlacementParams::new(cfg.k_true, cfg.tau, stream_seed(seed, TAG_PLACEMENT))
            };
            let pool = candidates(&graph, cfg.source_radius);
            let sources = pick_sources_among(&graph, &pool, &params)?.into_vec();
            (graph, sources)
        }
    };
    for attempt in 0..SPREAD_ATTEMPTS {
        let spread_seed = stream_seed(stream_seed(seed, TAG_SPREAD), attempt);
        let outcome = simulate_si(&graph, &sources, cfg.stop_n, spread_seed)?;
        let (infection_graph, local_to_global) = outcome.infection_graph(&graph);
        if !infection_graph.is_connected() {
            continue;
        }
        let local = |v: NodeId| local_to_global.binary_search(&v).expect("infected");
        let local_sources: Vec<NodeId> = outcome.sources.iter().map(|&s| local(s)).collect();
        let truth = Partition::new(
            local_sources.clone(),
            outcome
                .true_partition
                .assignment()
                .iter()
                .map(|(&v, &r)| (local(v), r))
                .collect(),
        )?;
        return Ok(Instance {
            graph,
            outcome,
            infection_graph,
            local_to_global,
            sources: local_sources,
            truth,
        });
    }
    Err(Error::Structure(format!(
        "infection graph disconnected in {SPREAD_ATTEMPTS} spreading attempts"
    )))
}

/// One algorithm on one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub family: Family,
    pub k_true: usize,
    pub k_est: Option<usize>,
    pub algo: Algo,
    pub delta_eta0: Option<f64>,
    pub delta_etadiam: Option<f64>,
    /// Only for partition-producing algorithms.
    pub min_cover: Option<f64>,
    pub diam_gn: Option<usize>,
    pub ms_elapsed: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Per-algorithm summary over all runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoAggregate {
    pub runs: usize,
    pub failures: usize,
    /// Fraction of successful runs with `k_est == k_true`.
    pub k_accuracy: f64,
    /// Number of successful runs per estimated source count.
    pub k_histogram: BTreeMap<usize, usize>,
    pub mean_delta_eta0: f64,
    pub mean_delta_etadiam: f64,
    pub mean_min_cover: Option<f64>,
    pub mean_diam_gn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub records: Vec<RunRecord>,
    pub aggregate: BTreeMap<Algo, AlgoAggregate>,
}

pub const CSV_HEADER: &str = "run,family,k_true,k_est,algo,delta_eta0,delta_etadiam,min_cover,diam_gn,ms_elapsed";

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Summaries of `records`, grouped by algorithm.
pub fn aggregate(records: &[RunRecord]) -> BTreeMap<Algo, AlgoAggregate> {
    let mut by_algo: BTreeMap<Algo, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_algo.entry(r.algo).or_default().push(r);
    }
    by_algo
        .into_iter()
        .map(|(algo, rows)| {
            let ok: Vec<&RunRecord> = rows.iter().copied().filter(|r| r.error.is_none()).collect();
            let mut k_histogram = BTreeMap::new();
            for r in &ok {
                *k_histogram.entry(r.k_est.expect("successful row")).or_insert(0) += 1;
            }
            let covers: Vec<f64> = ok.iter().filter_map(|r| r.min_cover).collect();
            let agg = AlgoAggregate {
                runs: rows.len(),
                failures: rows.len() - ok.len(),
                k_accuracy: mean(ok.iter().map(|r| f64::from(u8::from(r.k_est == Some(r.k_true))))),
                k_histogram,
                mean_delta_eta0: mean(ok.iter().filter_map(|r| r.delta_eta0)),
                mean_delta_etadiam: mean(ok.iter().filter_map(|r| r.delta_etadiam)),
                mean_min_cover: (!covers.is_empty()).then(|| mean(covers.into_iter())),
                mean_diam_gn: mean(ok.iter().filter_map(|r| r.diam_gn.map(|d| d as f64))),
            };
            (algo, agg)
        })
        .collect()
}

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    pub fn from_records(records: Vec<RunRecord>) -> ExperimentReport {
        let aggregate = aggregate(&records);
        ExperimentReport { records, aggregate }
    }

    /// True when the stored aggregates match a recomputation from the rows.
    pub fn aggregates_consistent(&self) -> bool {
        let fresh = aggregate(&self.records);
        fresh.len() == self.aggregate.len()
            && fresh.iter().all(|(k, a)| {
                let b = &self.aggregate[k];
                // NaN means "no data" and compares equal to itself here
                let same = |x: f64, y: f64| x == y || (x.is_nan() && y.is_nan());
                a.runs == b.runs
                    && a.failures == b.failures
                    && a.k_histogram == b.k_histogram
                    && same(a.k_accuracy, b.k_accuracy)
                    && same(a.mean_delta_eta0, b.mean_delta_eta0)
                    && same(a.mean_delta_etadiam, b.mean_delta_etadiam)
                    && same(a.mean_diam_gn, b.mean_diam_gn)
                    && a.mean_min_cover.map(f64::to_bits) == b.mean_min_cover.map(f64::to_bits)
            })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{:.3}",
                r.run,
                r.family.name(),
                r.k_true,
                opt(r.k_est),
                r.algo.name(),
                opt(r.delta_eta0),
                opt(r.delta_etadiam),
                opt(r.min_cover),
                opt(r.diam_gn),
                r.ms_elapsed
            )
            .expect("write to string");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs the estimators of `cfg.algos` on run `run`.
fn run_one(cfg: &ExperimentConfig, run: usize, shared: Option<&Graph>) -> Vec<RunRecord> {
    let seed = run_seed(cfg.seed, run as u64);
    let blank = |algo: Algo, error: String| RunRecord {
        run,
        family: cfg.gen.family,
        k_true: cfg.k_true,
        k_est: None,
        algo,
        delta_eta0: None,
        delta_etadiam: None,
        min_cover: None,
        diam_gn: None,
        ms_elapsed: 0.0,
        error: Some(error),
    };
    let inst = match build_instance_with(cfg, run, shared) {
        Ok(i) => i,
        Err(e) => return cfg.algos.iter().map(|&a| blank(a, e.to_string())).collect(),
    };
    let g = &inst.infection_graph;
    let diam = g.diameter();
    cfg.algos
        .iter()
        .map(|&algo| {
            let start = Instant::now();
            let result = estimate(cfg, algo, g, seed);
            let ms_elapsed = start.elapsed().as_secs_f64() * 1e3;
            let scored = result.and_then(|(nodes, partition)| {
                let m = match_sources(g, &nodes, &inst.sources)?;
                let cover = match &partition {
                    Some(p) => Some(region_covering(&inst.truth, p, &m)?),
                    None => None,
                };
                Ok((nodes.len(), m, cover))
            });
            match scored {
                Ok((k_est, m, cover)) => RunRecord {
                    run,
                    family: cfg.gen.family,
                    k_true: cfg.k_true,
                    k_est: Some(k_est),
                    algo,
                    delta_eta0: Some(error_distance_with(&m, k_est, cfg.k_true, 0.0)),
                    delta_etadiam: Some(error_distance_with(&m, k_est, cfg.k_true, diam as f64)),
                    min_cover: cover,
                    diam_gn: Some(diam),
                    ms_elapsed,
                    error: None,
                },
                Err(e) => RunRecord {
                    ms_elapsed,
                    ..blank(algo, e.to_string())
                },
            }
        })
        .collect()
}

/// Estimated sources (local ids) and, for partitioning algorithms, regions.
fn estimate(cfg: &ExperimentConfig, algo: Algo, g: &Graph, seed: u64) -> Result<(Vec<NodeId>, Option<Partition>)> {
    let nodes = |e: SourceEstimate| e.nodes.into_vec();
    Ok(match algo {
        Algo::Msep | Algo::MsepBfs => {
            let mcfg = cfg.msep_config(stream_seed(seed, TAG_MSEP));
            let r = if algo == Algo::Msep { msep(g, &mcfg)? } else { msep_bfs(g, &mcfg)? };
            (r.sources, Some(r.partition))
        }
        Algo::Nsse => (nodes(nsse(g, cfg.k_true.min(g.node_count()))?), None),
        Algo::NsseRandom => {
            let k = rng(stream_seed(seed, TAG_GUESS)).random_range(1..=cfg.k_max);
            (nodes(nsse(g, k.min(g.node_count()))?), None)
        }
        Algo::Sse => (nodes(sse_tree(g)?), None),
        Algo::SseBfs => (nodes(sse_bfs(g)?), None),
        Algo::Tse => (nodes(tse(g)?), None),
        Algo::GeoTse => (nodes(geometric_tse(g, cfg.delta.unwrap_or(1.0))?), None),
    })
}

/// Runs the experiment. Rows are ordered by run, then by the order of
/// `cfg.algos`, whatever the number of worker threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let shared = shared_graph(cfg)?;
    let shared = shared.as_ref();
    let records: Vec<RunRecord> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Argument(format!("cannot start {} workers: {e}", cfg.jobs)))?;
        pool.install(|| {
            (0..cfg.runs)
                .into_par_iter()
                .map(|run| run_one(cfg, run, shared))
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect()
    } else {
        (0..cfg.runs).flat_map(|run| run_one(cfg, run, shared)).collect()
    };
    Ok(ExperimentReport::from_records(records))
}

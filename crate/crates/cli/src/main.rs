use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use msource::estimators::{geometric_tse, nsse, sse_bfs, sse_tree, tse, SourceEstimate};
use msource::experiment::{run_experiment, ExperimentConfig};
use msource::generators::{generate, Family, GenParams};
use msource::graph::load_edge_list_remapped;
use msource::msep::{msep, msep_bfs, MergeEvent, MsepConfig, MsepResult, PairScorer};
use msource::oracle::{run_check, Check};
use msource::spread::{pick_sources, simulate_si, PlacementParams};
use msource::{Graph, NodeId, NodeSet, Partition};

/// Infection source estimation for SI epidemics on networks.
#[derive(Debug, Parser)]
#[command(name = "msource", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic network and write it as an edge list.
    Gen(GenArgs),
    /// Simulate SI spreading on a network.
    Simulate(SimulateArgs),
    /// Estimate infection sources from an infected subgraph.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment described by a JSON config.
    Benchmark(BenchmarkArgs),
    /// Check closed-form counts against brute-force enumeration.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    RegularTree,
    GeometricTree,
    SmallWorld,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::RegularTree => Family::RegularTree,
            FamilyArg::GeometricTree => Family::GeometricTree,
            FamilyArg::SmallWorld => Family::SmallWorld,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Network family.
    #[arg(long, value_enum, default_value = "geometric-tree")]
    family: FamilyArg,
    /// Tree depth (regular and geometric trees).
    #[arg(long, default_value_t = 10)]
    depth: usize,
    /// Node degree (regular tree) or lattice degree (small world).
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Node count (small world).
    #[arg(long, default_value_t = 1000)]
    nodes: usize,
    /// Rewiring probability (small world).
    #[arg(long, default_value_t = 0.1)]
    rewire_p: f64,
    /// Level growth exponent (geometric tree).
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Lower level-size constant (geometric tree).
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Upper level-size constant (geometric tree).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Root degree bounds (geometric tree).
    #[arg(long, default_value_t = 7)]
    d_min: usize,
    #[arg(long, default_value_t = 7)]
    d_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Edge list of the network.
    #[arg(long)]
    graph: PathBuf,
    /// Comma-separated source ids; drawn at random when absent.
    #[arg(long, value_delimiter = ',')]
    sources: Option<Vec<u64>>,
    /// Number of random sources when --sources is absent.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Minimum hop distance between random sources.
    #[arg(long, default_value_t = 2)]
    tau: u32,
    /// Stop once this many nodes are infected.
    #[arg(long, default_value_t = 500)]
    stop_n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Outcome JSON; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the infected ids, one per line, to this file.
    #[arg(long)]
    infected_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Sse,
    SseBfs,
    Tse,
    GeoTse,
    Nsse,
    Msep,
    MsepBfs,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Edge list of the network (or of the infection graph itself).
    #[arg(long)]
    graph: PathBuf,
    /// Infected ids, one per line; the whole graph is infected when absent.
    #[arg(long)]
    infected: Option<PathBuf>,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Number of sources for nsse.
    #[arg(long)]
    k: Option<usize>,
    /// Largest source count considered by msep and msep-bfs.
    #[arg(long, default_value_t = 3)]
    k_max: usize,
    /// Merge threshold in hops for msep and msep-bfs.
    #[arg(long, default_value_t = 2)]
    tau: u32,
    /// Q-factor parameter for geo-tse; msep scores region pairs with it when
    /// given.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    /// Experiment config (JSON); defaults are used for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's run count.
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckArg {
    /// Single-source counts against enumeration.
    SingleSource,
    /// Two-source counts and the best pair against enumeration.
    Pair,
    /// Nearest-source partition against the best partition weight.
    Voronoi,
    /// Step probabilities on the built-in two-source example.
    Probability,
    /// Every check.
    All,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    check: CheckArg,
    /// Random instances per check; each check has its own default.
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Oracle(a) => oracle(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Graph with dense ids plus the dense-to-file id table.
fn read_graph(path: &Path) -> Result<(Graph, Vec<u64>)> {
    let f = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(load_edge_list_remapped(BufReader::new(f)).with_context(|| format!("in {}", path.display()))?)
}

fn dense_id(ids: &[u64], x: u64) -> Result<NodeId> {
    ids.binary_search(&x)
        .map_err(|_| anyhow::anyhow!("node {x} does not appear in the graph"))
}

fn gen(a: GenArgs) -> Result<ExitCode> {
    let params = GenParams {
        family: a.family.into(),
        degree: a.degree,
        d_min: a.d_min,
        d_max: a.d_max,
        depth: a.depth,
        nodes: a.nodes,
        alpha: a.alpha,
        b: a.b,
        c: a.c,
        rewire_p: a.rewire_p,
        seed: a.seed,
    };
    let g = generate(&params)?;
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf)?;
    emit(a.out.as_deref(), std::str::from_utf8(&buf)?)?;
    Ok(ExitCode::SUCCESS)
}

fn simulate(a: SimulateArgs) -> Result<ExitCode> {
    let (g, ids) = read_graph(&a.graph)?;
    let sources: Vec<NodeId> = match &a.sources {
        Some(list) => list.iter().map(|&x| dense_id(&ids, x)).collect::<Result<_>>()?,
        None => pick_sources(&g, &PlacementParams::new(a.k, a.tau, a.seed))?.into_vec(),
    };
    let outcome = simulate_si(&g, &sources, a.stop_n, a.seed)?;
    // Report ids as they appear in the input file.
    let original = |v: NodeId| ids[v];
    let record = serde_json::json!({
        "sources": outcome.sources.iter().map(|&v| original(v)).collect::<Vec<_>>(),
        "order": outcome.infected_order.iter().map(|&v| original(v)).collect::<Vec<_>>(),
        "parent": outcome
            .parent
            .iter()
            .map(|(&v, &p)| (original(v).to_string(), original(p)))
            .collect::<BTreeMap<_, _>>(),
        "elapsed": outcome.elapsed,
    });
    emit(a.out.as_deref(), &format!("{record}\n"))?;
    if let Some(p) = &a.infected_out {
        let mut infected: Vec<u64> = outcome.infected_order.iter().map(|&v| original(v)).collect();
        infected.sort_unstable();
        let text: String = infected.iter().map(|v| format!("{v}\n")).collect();
        fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn read_infected(path: &Path) -> Result<Vec<u64>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut ids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        ids.push(
            line.parse::<u64>()
                .with_context(|| format!("{}:{}: invalid node id {line:?}", path.display(), i + 1))?,
        );
    }
    Ok(ids)
}

fn estimate(a: EstimateArgs) -> Result<ExitCode> {
    let (full, ids) = read_graph(&a.graph)?;
    // `g` uses dense local ids; `to_file[v]` is the id of `v` in the input.
    let (g, to_file): (Graph, Vec<u64>) = match &a.infected {
        Some(p) => {
            let mut members = read_infected(p)?
                .into_iter()
                .map(|x| dense_id(&ids, x))
                .collect::<Result<Vec<_>>>()?;
            members.sort_unstable();
            members.dedup();
            let (sub, map) = full.induced_subgraph(&members);
            (sub, map.into_iter().map(|v| ids[v]).collect())
        }
        None => (full, ids),
    };
    if g.node_count() == 0 {
        bail!("the infection graph is empty");
    }
    let single = |est: SourceEstimate| -> String {
        SourceEstimate {
            nodes: NodeSet::new(est.nodes.iter().map(|v| to_file[v] as NodeId)),
            ..est
        }
        .to_json()
    };
    let text = match a.algo {
        AlgoArg::Sse => single(sse_tree(&g)?),
        AlgoArg::SseBfs => single(sse_bfs(&g)?),
        AlgoArg::Tse => single(tse(&g)?),
        AlgoArg::GeoTse => single(geometric_tse(&g, a.delta.unwrap_or(1.0))?),
        AlgoArg::Nsse => {
            let Some(k) = a.k else {
                bail!("nsse needs --k");
            };
            single(nsse(&g, k)?)
        }
        AlgoArg::Msep | AlgoArg::MsepBfs => {
            let cfg = MsepConfig {
                k_max: a.k_max,
                tau: a.tau,
                seed: a.seed,
                pair_scorer: match a.delta {
                    Some(delta) => PairScorer::Geometric { delta },
                    None => PairScorer::Exact,
                },
                ..MsepConfig::default()
            };
            let res = if a.algo == AlgoArg::Msep { msep(&g, &cfg)? } else { msep_bfs(&g, &cfg)? };
            for w in &res.warnings {
                eprintln!("warning: {w}");
            }
            relabel(&res, &to_file)?.to_json()
        }
    };
    emit(a.out.as_deref(), &format!("{text}\n"))?;
    Ok(ExitCode::SUCCESS)
}

/// The result with node ids translated through `to_file`.
fn relabel(res: &MsepResult, to_file: &[u64]) -> Result<MsepResult> {
    let id = |v: NodeId| to_file[v] as NodeId;
    let region_of: BTreeMap<NodeId, usize> = res.partition.assignment().iter().map(|(&v, &r)| (id(v), r)).collect();
    let sources: Vec<NodeId> = res.sources.iter().map(|&v| id(v)).collect();
    Ok(MsepResult {
        partition: Partition::new(sources.clone(), region_of)?,
        sources,
        merge_log: res
            .merge_log
            .iter()
            .map(|m| MergeEvent {
                pair: (id(m.pair.0), id(m.pair.1)),
                kept: id(m.kept),
                discarded: id(m.discarded),
                ..m.clone()
            })
            .collect(),
        warnings: res.warnings.clone(),
    })
}

fn benchmark(a: BenchmarkArgs) -> Result<ExitCode> {
    let mut cfg: ExperimentConfig = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", p.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.runs {
        cfg.runs = r;
    }
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    let report = run_experiment(&cfg)?;
    let text = match a.format {
        Format::Csv => report.to_csv(),
        Format::Json => format!("{}\n", report.to_json()),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn oracle(a: OracleArgs) -> Result<ExitCode> {
    let checks: Vec<Check> = match a.check {
        CheckArg::SingleSource => vec![Check::SingleSource],
        CheckArg::Pair => vec![Check::Pair],
        CheckArg::Voronoi => vec![Check::Voronoi],
        CheckArg::Probability => vec![Check::Probability],
        CheckArg::All => Check::ALL.to_vec(),
    };
    let mut ok = true;
    for c in checks {
        let rep = run_check(c, a.instances.unwrap_or_else(|| c.default_instances()), a.seed)?;
        println!(
            "{:<14} {} instances={} cases={} passed={} failed={}",
            c.name(),
            if rep.all_passed() { "PASS" } else { "FAIL" },
            rep.instances,
            rep.cases,
            rep.passed,
            rep.cases - rep.passed
        );
        for f in &rep.failures {
            println!("  {f}");
        }
        ok &= rep.all_passed();
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn relabel_translates_every_id() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let res = msep(&g, &MsepConfig { k_max: 1, ..MsepConfig::default() }).unwrap();
        let out = relabel(&res, &[10, 20, 30]).unwrap();
        assert_eq!(out.sources, vec![20]);
        assert_eq!(out.partition.regions(), vec![vec![10, 20, 30]]);
    }
}

//! Command-line front end: `solve`, `sweep`, `generate`, `simulate`, `track`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::datasets;
use crate::error::Error;
use crate::generators::{
    drop_isolated, generate_gaussian_mixture, generate_sbm, pick_labeled_nodes,
    simulate_dynamic_sbm, tracking_experiment, Density, DynamicSbmSpec, GaussianMixtureSpec,
    TrackingSpec,
};
use crate::graph::{LabelAssignment, NodeId, SimilarityGraph};
use crate::io::{
    labels_from_pairs, load_class_file, load_edge_list, truth_for_graph, write_class_file,
    write_edge_list, write_features_csv, write_positions,
};
use crate::metrics::{classify, error_against, TrajectoryRecord};
use crate::operators::DiffusionOperator;
use crate::power::{power_solve_observed, with_threads};
use crate::sampling::{run_sampling, SelectionPolicy, SolverConfig, StepSchedule, UpdateRule};

#[derive(Debug, Parser)]
#[command(name = "gssl", version, about = "Graph-based semi-supervised classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem with power iteration or the sampling solver.
    Solve(SolveArgs),
    /// Average error over a σ × μ grid.
    Sweep(SweepArgs),
    /// Write a synthetic graph with labels and ground truth.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Run a dynamic-graph simulation.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// New-node tracking on a Gaussian-mixture graph.
    Track(TrackArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Power,
    Sampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Mcmc,
    RoundRobin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetArg {
    Lesmis,
    LesmisWeighted,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Edge list; the bundled dataset is used when absent.
    #[arg(long, requires = "labels")]
    pub graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    pub labels: Option<PathBuf>,
    /// Ground-truth class file for error trajectories.
    #[arg(long, requires = "graph")]
    pub truth: Option<PathBuf>,
    /// Replace every edge weight in `--graph` by 1.
    #[arg(long)]
    pub unit_weights: bool,
    #[arg(long, value_enum, default_value = "lesmis", conflicts_with = "graph")]
    pub dataset: DatasetArg,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = crate::operators::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// `dec:<c>` or `const:<eta>`.
    #[arg(long, default_value = "dec:100", value_parser = parse_schedule)]
    pub schedule: StepSchedule,
    #[arg(long, value_enum, default_value = "mcmc")]
    pub policy: PolicyArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the update constants exactly as printed (`H_ii`, `αY`).
    #[arg(long)]
    pub compat_printed_update: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            sigma: self.sigma,
            mu: self.mu,
            epsilon: self.epsilon,
            schedule: self.schedule,
            policy: match self.policy {
                PolicyArg::Mcmc => SelectionPolicy::Mcmc,
                PolicyArg::RoundRobin => SelectionPolicy::RoundRobin,
            },
            update_rule: if self.compat_printed_update {
                UpdateRule::Printed
            } else {
                UpdateRule::Consistent
            },
            seed: self.seed,
            record_snapshots: false,
        }
    }
}

fn parse_schedule(s: &str) -> Result<StepSchedule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Accepts `20000000` as well as `2e7`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(format!("'{s}' is not a non-negative integer"));
    }
    Ok(v as u64)
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value = "power")]
    pub method: Method,
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// Stop power iteration once the weighted-norm step is at most this.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads for power iteration (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Add an `iter_per_avg_degree` column to the trajectory.
    #[arg(long)]
    pub normalize_x: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value = "power")]
    pub method: Method,
    #[arg(long, default_value = "0,0.5,1", value_delimiter = ',', allow_hyphen_values = true)]
    pub sigmas: Vec<f64>,
    #[arg(long, default_value = "0.5,1,2", value_delimiter = ',')]
    pub mus: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum GenerateCmd {
    /// Geometric graph over a 2-D Gaussian mixture.
    Gaussian(GaussianArgs),
    /// Static stochastic block model.
    Sbm(SbmArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GaussianArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 1.0)]
    pub std_dev: f64,
    #[arg(long, default_value_t = 2)]
    pub labeled_per_class: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SbmArgs {
    /// Block sizes, comma separated.
    #[arg(long, default_value = "100,100,100", value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.005)]
    pub p_out: f64,
    #[arg(long, default_value_t = 2)]
    pub labeled_per_class: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCmd {
    /// Block model with M/M/K/K arrivals and departures.
    Dsbm(DsbmArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DsbmArgs {
    #[arg(long, default_value_t = 1000)]
    pub cap: usize,
    /// Arrival rate per time unit.
    #[arg(long, default_value_t = 5e-5)]
    pub lambda: f64,
    /// Per-node departure rate.
    #[arg(long, default_value_t = 1e-7)]
    pub mu_dep: f64,
    #[arg(long, default_value_t = 500)]
    pub init: usize,
    /// Time units (= solver steps) to simulate.
    #[arg(long, default_value = "2e7", value_parser = parse_count)]
    pub steps: u64,
    /// `hcd`, `mcd` or `lcd`.
    #[arg(long, default_value = "mcd")]
    pub density: Density,
    /// Overrides the density preset.
    #[arg(long)]
    pub p_in: Option<f64>,
    #[arg(long, default_value_t = 0.005)]
    pub p_out: f64,
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 2)]
    pub labeled_per_class: usize,
    /// Labelled nodes never depart.
    #[arg(long)]
    pub permanent_labels: bool,
    /// Constant step size.
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = crate::operators::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub compat_printed_update: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrackArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub pretrain: usize,
    #[arg(long, default_value_t = 20)]
    pub post: usize,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 2)]
    pub labeled_per_class: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Parses `std::env::args` and runs; returns the process exit status.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_status(&e)
        }
    }
}

/// 2 for bad input or configuration, 1 for anything else.
pub fn exit_status(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(_) => 2,
        None => 1,
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Generate(GenerateCmd::Gaussian(a)) => cmd_generate_gaussian(&a),
        Command::Generate(GenerateCmd::Sbm(a)) => cmd_generate_sbm(&a),
        Command::Simulate(SimulateCmd::Dsbm(a)) => cmd_simulate(&a),
        Command::Track(a) => cmd_track(&a),
    }
}

struct Problem {
    graph: SimilarityGraph,
    labels: LabelAssignment,
    truth: Option<Vec<usize>>,
}

fn load_problem(input: &InputArgs) -> crate::Result<Problem> {
    let Some(graph_path) = &input.graph else {
        let d = match input.dataset {
            DatasetArg::Lesmis => datasets::les_miserables(),
            DatasetArg::LesmisWeighted => datasets::les_miserables_weighted(),
        };
        return Ok(Problem {
            graph: d.graph,
            labels: d.labels,
            truth: Some(d.truth),
        });
    };
    let labels_path = input.labels.as_ref().expect("clap requires --labels with --graph");
    let graph = load_edge_list(graph_path, input.unit_weights)?;
    let label_pairs = load_class_file(labels_path)?;
    let truth = match &input.truth {
        Some(p) => {
            let pairs = load_class_file(p)?;
            Some(truth_for_graph(&graph, &pairs)?)
        }
        None => None,
    };
    let k = label_pairs
        .iter()
        .map(|p| p.1 + 1)
        .chain(truth.iter().flatten().map(|c| c + 1))
        .max()
        .unwrap_or(1);
    for &(id, _) in &label_pairs {
        if !graph.contains(id) {
            return Err(Error::UnknownNode(id));
        }
    }
    let labels = labels_from_pairs(&label_pairs, Some(k))?;
    Ok(Problem {
        graph,
        labels,
        truth,
    })
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn solve_once(
    p: &Problem,
    config: &SolverConfig,
    method: Method,
    iters: usize,
    tol: Option<f64>,
) -> crate::Result<(crate::graph::FeatureMatrix, TrajectoryRecord)> {
    config.validate()?;
    match method {
        Method::Power => {
            let op = DiffusionOperator::build(&p.graph, config.sigma)?;
            let y = p.labels.indicator(&p.graph)?;
            let mask = p.labels.mask(&p.graph);
            let mut traj = TrajectoryRecord::new();
            let mut err = None;
            let (f, _) = power_solve_observed(
                &y,
                &op,
                &y,
                config.alpha()?,
                tol.unwrap_or(f64::MIN_POSITIVE),
                iters,
                |t, f| {
                    if let (Some(truth), None) = (&p.truth, &err) {
                        match error_against(&classify(f), truth, &mask) {
                            Ok(e) => traj.push(t, e, p.graph.node_count()),
                            Err(e) => err = Some(e),
                        }
                    }
                },
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            Ok((f, traj))
        }
        Method::Sampling => run_sampling(&p.graph, &p.labels, config, iters, p.truth.as_deref()),
    }
}

fn maybe_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> crate::Result<T> {
    match threads {
        Some(t) => with_threads(t, f),
        None => Ok(f()),
    }
}

pub fn cmd_solve(a: &SolveArgs) -> anyhow::Result<()> {
    let p = load_problem(&a.input)?;
    let config = a.solver.config();
    let (f, traj) = maybe_threads(a.threads, || solve_once(&p, &config, a.method, a.iters, a.tol))??;
    ensure_dir(&a.out_dir)?;
    let classes = classify(&f);
    write_features_csv(p.graph.ids(), &f, &classes, create(&a.out_dir, "features.csv")?)?;
    let avg_degree = a
        .normalize_x
        .then(|| p.graph.degrees().iter().sum::<f64>() / p.graph.node_count() as f64);
    traj.write_csv(create(&a.out_dir, "trajectory.csv")?, avg_degree)?;
    match traj.last() {
        Some(r) => println!(
            "{} iterations, {} misclassified ({:.2}%)",
            r.iteration, r.error_count, r.error_pct
        ),
        None => println!("done; no ground truth, trajectory is empty"),
    }
    Ok(())
}

pub fn cmd_sweep(a: &SweepArgs) -> anyhow::Result<()> {
    let p = load_problem(&a.input)?;
    if p.truth.is_none() {
        return Err(Error::invalid("sweep needs ground truth (--truth)").into());
    }
    if a.repeats == 0 {
        return Err(Error::invalid("--repeats must be at least 1").into());
    }
    let base = a.solver.config();
    let grid: Vec<(f64, f64)> = a
        .sigmas
        .iter()
        .flat_map(|&s| a.mus.iter().map(move |&m| (s, m)))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..a.repeats).map(move |r| (g, r)))
        .collect();
    let results: Vec<crate::Result<f64>> = maybe_threads(a.threads, || {
        jobs.par_iter()
            .map(|&(g, r)| {
                let mut stream = ChaCha8Rng::seed_from_u64(base.seed);
                stream.set_stream((g * a.repeats + r) as u64);
                let config = SolverConfig {
                    sigma: grid[g].0,
                    mu: grid[g].1,
                    seed: stream.random(),
                    ..base.clone()
                };
                let (_, traj) = solve_once(&p, &config, a.method, a.iters, None)?;
                Ok(traj.last().map_or(0.0, |row| row.error_pct))
            })
            .collect()
    })?;
    ensure_dir(&a.out_dir)?;
    let mut w = csv::Writer::from_writer(create(&a.out_dir, "sweep.csv")?);
    w.write_record(["sigma", "mu", "avg_error"])?;
    for (g, &(s, m)) in grid.iter().enumerate() {
        let mut sum = 0.0;
        for r in 0..a.repeats {
            sum += results[g * a.repeats + r].as_ref().map_err(|e| anyhow::anyhow!("{e}"))?;
        }
        let avg = sum / a.repeats as f64;
        w.write_record([s.to_string(), m.to_string(), avg.to_string()])?;
        println!("sigma={s} mu={m} avg_error={avg:.3}%");
    }
    w.flush()?;
    Ok(())
}

/// Writes the graph with nodes renumbered by row, so that the files load
/// back into the same graph.
fn write_generated(
    dir: &Path,
    graph: &SimilarityGraph,
    truth: &[usize],
    labels: &LabelAssignment,
    positions: Option<&[[f64; 2]]>,
) -> anyhow::Result<()> {
    ensure_dir(dir)?;
    let mut compact = SimilarityGraph::with_nodes(graph.node_count());
    for (u, v, w) in graph.edges() {
        compact.add_edge(
            NodeId(graph.row_of(u).expect("live")),
            NodeId(graph.row_of(v).expect("live")),
            w,
        )?;
    }
    write_edge_list(&compact, create(dir, "graph.edges")?)?;
    let row = |id: NodeId| NodeId(graph.row_of(id).expect("labelled node is live"));
    write_class_file(labels.iter().map(|(id, c)| (row(id), c)), create(dir, "labels.txt")?)?;
    write_class_file(truth.iter().enumerate().map(|(r, &c)| (NodeId(r), c)), create(dir, "truth.txt")?)?;
    if let Some(pos) = positions {
        let ids: Vec<NodeId> = (0..pos.len()).map(NodeId).collect();
        write_positions(&ids, pos, create(dir, "positions.txt")?)?;
    }
    Ok(())
}

pub fn cmd_generate_gaussian(a: &GaussianArgs) -> anyhow::Result<()> {
    let mut spec = GaussianMixtureSpec::with_defaults(a.n, a.seed);
    spec.radius = a.radius;
    spec.std_devs = vec![a.std_dev; spec.num_classes()];
    let mut m = generate_gaussian_mixture(&spec)?;
    let dropped = drop_isolated(&mut m)?;
    let labels = pick_labeled_nodes(&m.graph, &m.truth, a.labeled_per_class)?;
    write_generated(&a.out_dir, &m.graph, &m.truth, &labels, Some(&m.positions))?;
    println!(
        "{} nodes, {} edges, {dropped} isolated nodes dropped, connected: {}",
        m.graph.node_count(),
        m.graph.edge_count(),
        m.graph.is_connected()
    );
    Ok(())
}

pub fn cmd_generate_sbm(a: &SbmArgs) -> anyhow::Result<()> {
    let (mut graph, mut truth) = generate_sbm(&a.sizes, a.p_in, a.p_out, a.seed)?;
    let isolated = graph.isolated_nodes();
    for &id in &isolated {
        let row = graph.remove_node(id)?;
        truth.remove(row);
    }
    let labels = pick_labeled_nodes(&graph, &truth, a.labeled_per_class)?;
    write_generated(&a.out_dir, &graph, &truth, &labels, None)?;
    println!(
        "{} nodes, {} edges, {} isolated nodes dropped",
        graph.node_count(),
        graph.edge_count(),
        isolated.len()
    );
    Ok(())
}

pub fn cmd_simulate(a: &DsbmArgs) -> anyhow::Result<()> {
    if a.classes == 0 {
        return Err(Error::invalid("--classes must be at least 1").into());
    }
    let mut spec = DynamicSbmSpec {
        class_probs: vec![1.0 / a.classes as f64; a.classes],
        p_out: a.p_out,
        arrival_rate: a.lambda,
        departure_rate: a.mu_dep,
        cap: a.cap,
        initial_size: a.init,
        labeled_per_class: a.labeled_per_class,
        permanent_labels: a.permanent_labels,
        seed: a.seed,
        ..DynamicSbmSpec::with_defaults(a.seed)
    }
    .with_density(a.density);
    if let Some(p) = a.p_in {
        spec.p_in = p;
    }
    let config = SolverConfig {
        sigma: a.sigma,
        mu: a.mu,
        epsilon: a.epsilon,
        schedule: StepSchedule::Constant(a.eta),
        policy: SelectionPolicy::Mcmc,
        update_rule: if a.compat_printed_update {
            UpdateRule::Printed
        } else {
            UpdateRule::Consistent
        },
        seed: a.seed,
        record_snapshots: false,
    };
    let out = simulate_dynamic_sbm(&spec, &config, a.steps)?;
    ensure_dir(&a.out_dir)?;
    out.trajectory.write_csv(create(&a.out_dir, "trajectory.csv")?, None)?;
    let mut log = create(&a.out_dir, "events.log")?;
    out.write_events(&mut log)?;
    log.flush()?;
    if a.steps >= 2 {
        println!(
            "mean size over second half: {:.2}",
            out.time_average_size(a.steps / 2, a.steps)
        );
    }
    if let Some(r) = out.trajectory.last() {
        println!("final error {:.2}% with {} nodes", r.error_pct, r.n_nodes);
    }
    Ok(())
}

pub fn cmd_track(a: &TrackArgs) -> anyhow::Result<()> {
    let mut spec = TrackingSpec::with_defaults(a.n, a.solver.seed);
    spec.mixture.radius = a.radius;
    spec.pretrain = a.pretrain;
    spec.post = a.post;
    spec.labeled_per_class = a.labeled_per_class;
    let out = tracking_experiment(&spec, &a.solver.config())?;
    ensure_dir(&a.out_dir)?;
    let mut w = csv::Writer::from_writer(create(&a.out_dir, "track.csv")?);
    let k = out.history.first().map_or(0, Vec::len);
    let mut header = vec!["iteration".to_string()];
    header.extend((0..k).map(|c| format!("f_{c}")));
    w.write_record(&header)?;
    for (it, row) in out.history.iter().enumerate() {
        let mut rec = vec![(it + 1).to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    println!(
        "new node {} at ({:.3}, {:.3}) with {} neighbours: planted class {}, predicted {}",
        out.node, out.position[0], out.position[1], out.neighbors, out.planted, out.predicted
    );
    println!(
        "pretrain error {:.2}%; unsupported classes {:?} stayed zero: {}",
        out.pretrain_error.percentage,
        out.unsupported_classes,
        out.unsupported_stay_zero()
    );
    Ok(())
}

//! Stochastic-approximation solver driven by a random walk.
//!
//! At step `t` a node `i` is selected (by the walk itself, round robin, or a
//! focus cycle), a successor `j ~ Q(i, ·)` is drawn, and row `i` of `F` moves
//! towards `αH_ii F_j + (1-α)Y_i` by `η_t` times the likelihood ratio
//! `p(i,j)/q(i,j)`. Because `E_q[(p/q) H_ii F_j] = (BF)_i`, the expected
//! increment is `(αBF − F + (1-α)Y)_i` and the fixed point is that of the
//! power iteration.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, LabelAssignment, NodeId, SimilarityGraph};
use crate::metrics::{classify, error_against, TrajectoryRecord};
use crate::operators::{alpha_from_mu, DiffusionOperator, WalkKernel, DEFAULT_EPSILON};

/// Step-size sequence `η_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `η_t = 1 / (2 + ⌊t / period⌋)`.
    Decreasing { period: u64 },
    /// `η_t = η` for all `t`; keeps tracking ability on changing graphs.
    Constant(f64),
}

impl StepSchedule {
    #[inline]
    pub fn eta(&self, t: u64) -> f64 {
        match *self {
            StepSchedule::Decreasing { period } => 1.0 / (2.0 + (t / period) as f64),
            StepSchedule::Constant(eta) => eta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSchedule::Decreasing { period: 0 } => {
                Err(Error::invalid("decreasing schedule period must be >= 1"))
            }
            StepSchedule::Constant(eta) if !(eta > 0.0 && eta <= 1.0) => Err(Error::invalid(
                format!("constant step size must be in (0,1], got {eta}"),
            )),
            _ => Ok(()),
        }
    }
}

impl FromStr for StepSchedule {
    type Err = Error;

    /// `dec:<period>` or `const:<eta>`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, val) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("schedule '{s}': expected dec:<c> or const:<eta>")))?;
        let sched = match kind {
            "dec" => StepSchedule::Decreasing {
                period: val
                    .parse()
                    .map_err(|_| Error::invalid(format!("schedule period '{val}'")))?,
            },
            "const" => StepSchedule::Constant(
                val.parse()
                    .map_err(|_| Error::invalid(format!("step size '{val}'")))?,
            ),
            _ => return Err(Error::invalid(format!("unknown schedule kind '{kind}'"))),
        };
        sched.validate()?;
        Ok(sched)
    }
}

impl fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSchedule::Decreasing { period } => write!(f, "dec:{period}"),
            StepSchedule::Constant(eta) => write!(f, "const:{eta}"),
        }
    }
}

/// How the node to update is chosen at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionPolicy {
    /// Follow the chain `X_t` with kernel `Q`.
    Mcmc,
    /// Cycle through rows `0..N`.
    RoundRobin,
    /// Cycle `v`, then each neighbour of `v` in id order, then `v` again.
    NewNodeFocus(NodeId),
}

/// Constants of the per-step update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateRule {
    /// `F_ik += η r (αH_ii F_jk − F_ik + (1−α)Y_ik)`; fixed point is the
    /// closed-form solution.
    #[default]
    Consistent,
    /// `F_ik += η r (H_ii F_jk − F_ik + αY_ik)`, kept for comparison runs.
    Printed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub sigma: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub schedule: StepSchedule,
    pub policy: SelectionPolicy,
    pub update_rule: UpdateRule,
    pub seed: u64,
    /// Keep per-iteration class snapshots in the trajectory.
    pub record_snapshots: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: 0.5,
            mu: 1.0,
            epsilon: DEFAULT_EPSILON,
            schedule: StepSchedule::Decreasing { period: 100 },
            policy: SelectionPolicy::Mcmc,
            update_rule: UpdateRule::Consistent,
            seed: 0,
            record_snapshots: false,
        }
    }
}

impl SolverConfig {
    pub fn alpha(&self) -> Result<f64> {
        alpha_from_mu(self.mu)
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha()?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(format!(
                "epsilon must be in (0,1), got {}",
                self.epsilon
            )));
        }
        if !self.sigma.is_finite() {
            return Err(Error::invalid("sigma must be finite"));
        }
        self.schedule.validate()
    }
}

/// Position of the chain plus its random stream and step counter.
#[derive(Debug, Clone)]
pub struct WalkerState {
    /// Row of `X_t` in the current graph snapshot.
    pub current: usize,
    pub step: u64,
    rng: ChaCha8Rng,
}

impl WalkerState {
    pub fn new(start: usize, seed: u64) -> Self {
        Self {
            current: start,
            step: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Walker started at a uniformly random row of an `n`-node graph.
    pub fn uniform_start(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let current = rng.random_range(0..n);
        Self {
            current,
            step: 0,
            rng,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Moves the walker one transition of `Q` and returns the new row.
pub fn sample_next(walker: &mut WalkerState, kernel: &WalkKernel) -> usize {
    let (j, _) = kernel.sample(walker.current, &mut walker.rng);
    walker.current = j;
    walker.step += 1;
    j
}

/// `p(i,j) / q(i,j)`.
pub fn likelihood_ratio(i: usize, j: usize, kernel: &WalkKernel) -> f64 {
    kernel.likelihood_ratio(i, j)
}

/// Everything the update needs besides `F`.
#[derive(Debug, Clone, Copy)]
pub struct SamplingProblem<'a> {
    pub op: &'a DiffusionOperator,
    pub kernel: &'a WalkKernel,
    pub y: &'a FeatureMatrix,
    pub alpha: f64,
    pub rule: UpdateRule,
}

impl SamplingProblem<'_> {
    /// The bracket `αH_ii F_jk − F_ik + (1−α)Y_ik` (or its printed variant)
    /// before scaling by the likelihood ratio.
    #[inline]
    pub fn bracket(&self, f: &FeatureMatrix, i: usize, j: usize, k: usize) -> f64 {
        let h = self.op.row_sum(i);
        match self.rule {
            UpdateRule::Consistent => {
                self.alpha * h * f.get(j, k) - f.get(i, k) + (1.0 - self.alpha) * self.y.get(i, k)
            }
            UpdateRule::Printed => h * f.get(j, k) - f.get(i, k) + self.alpha * self.y.get(i, k),
        }
    }

    /// Updates all columns of row `i` using successor `j`.
    pub fn update(&self, f: &mut FeatureMatrix, i: usize, j: usize, eta: f64) {
        let ratio = self.kernel.likelihood_ratio(i, j);
        self.update_with_ratio(f, i, j, eta, ratio);
    }

    #[inline]
    pub fn update_with_ratio(&self, f: &mut FeatureMatrix, i: usize, j: usize, eta: f64, ratio: f64) {
        if eta == 0.0 || ratio == 0.0 {
            return;
        }
        let scale = eta * ratio;
        let h = self.op.row_sum(i);
        let k = f.cols();
        let (a, c) = match self.rule {
            UpdateRule::Consistent => (self.alpha * h, 1.0 - self.alpha),
            UpdateRule::Printed => (h, self.alpha),
        };
        if i == j {
            let row = f.row_mut(i);
            for (col, v) in row.iter_mut().enumerate() {
                *v += scale * (a * *v - *v + c * self.y.get(i, col));
            }
            return;
        }
        for col in 0..k {
            let fi = f.get(i, col);
            let delta = a * f.get(j, col) - fi + c * self.y.get(i, col);
            f.set(i, col, fi + scale * delta);
        }
    }
}

/// `sampling_update` as a free function.
#[allow(clippy::too_many_arguments)]
pub fn sampling_update(
    f: &mut FeatureMatrix,
    i: usize,
    j: usize,
    eta: f64,
    op: &DiffusionOperator,
    kernel: &WalkKernel,
    y: &FeatureMatrix,
    alpha: f64,
) {
    SamplingProblem {
        op,
        kernel,
        y,
        alpha,
        rule: UpdateRule::Consistent,
    }
    .update(f, i, j, eta);
}

#[derive(Debug, Clone)]
enum Selector {
    Mcmc,
    RoundRobin { next: usize },
    Cycle { rows: Vec<usize>, next: usize },
}

/// Sequential sampling solver over a fixed graph snapshot.
#[derive(Debug, Clone)]
pub struct SamplingSolver<'a> {
    problem: SamplingProblem<'a>,
    schedule: StepSchedule,
    selector: Selector,
    walker: WalkerState,
}

impl<'a> SamplingSolver<'a> {
    /// `graph` is only consulted to resolve a focus node into its cycle.
    pub fn new(
        problem: SamplingProblem<'a>,
        graph: &SimilarityGraph,
        schedule: StepSchedule,
        policy: SelectionPolicy,
        seed: u64,
    ) -> Result<Self> {
        let n = problem.op.n();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        schedule.validate()?;
        let selector = match policy {
            SelectionPolicy::Mcmc => Selector::Mcmc,
            SelectionPolicy::RoundRobin => Selector::RoundRobin { next: 0 },
            SelectionPolicy::NewNodeFocus(v) => Selector::Cycle {
                rows: focus_cycle(graph, v)?,
                next: 0,
            },
        };
        Ok(Self {
            problem,
            schedule,
            selector,
            walker: WalkerState::uniform_start(n, seed),
        })
    }

    /// Continue the schedule from step `t` instead of 0.
    pub fn starting_at(mut self, t: u64) -> Self {
        self.walker.step = t;
        self
    }

    pub fn steps_taken(&self) -> u64 {
        self.walker.step
    }

    pub fn walker(&self) -> &WalkerState {
        &self.walker
    }

    /// One selection + update. Returns `(i, j)`.
    pub fn step(&mut self, f: &mut FeatureMatrix) -> (usize, usize) {
        let i = match &mut self.selector {
            Selector::Mcmc => self.walker.current,
            Selector::RoundRobin { next } => {
                let i = *next;
                *next = (*next + 1) % self.problem.op.n();
                i
            }
            Selector::Cycle { rows, next } => {
                let i = rows[*next];
                *next = (*next + 1) % rows.len();
                i
            }
        };
        let (j, ratio) = self.problem.kernel.sample(i, &mut self.walker.rng);
        let eta = self.schedule.eta(self.walker.step);
        self.problem.update_with_ratio(f, i, j, eta, ratio);
        if matches!(self.selector, Selector::Mcmc) {
            self.walker.current = j;
        }
        self.walker.step += 1;
        (i, j)
    }

    pub fn run(&mut self, f: &mut FeatureMatrix, steps: u64) {
        for _ in 0..steps {
            self.step(f);
        }
    }
}

/// Rows `[v, n_1, ..., n_m]` with neighbours in ascending id order.
pub fn focus_cycle(graph: &SimilarityGraph, v: NodeId) -> Result<Vec<usize>> {
    let nbrs = graph.neighbors(v)?;
    if nbrs.is_empty() {
        return Err(Error::IsolatedNode(v));
    }
    let mut rows = Vec::with_capacity(nbrs.len() + 1);
    rows.push(graph.row_of(v).expect("checked above"));
    rows.extend(nbrs.iter().map(|(id, _)| graph.row_of(*id).expect("live neighbour")));
    Ok(rows)
}

/// Runs `iterations * N` steps from `F = Y` and records the error against
/// `truth` (row-aligned planted classes) after every `N` steps.
pub fn run_sampling(
    graph: &SimilarityGraph,
    labels: &LabelAssignment,
    config: &SolverConfig,
    iterations: usize,
    truth: Option<&[usize]>,
) -> Result<(FeatureMatrix, TrajectoryRecord)> {
    let y = labels.indicator(graph)?;
    let mut f = y.clone();
    let traj = run_sampling_from(graph, labels, config, iterations, truth, &mut f, 0, |_, _| {})?;
    Ok((f, traj))
}

/// [`run_sampling`] starting from a caller-supplied `F` and schedule step,
/// calling `observe(iteration, F)` after each iteration.
#[allow(clippy::too_many_arguments)]
pub fn run_sampling_from<O>(
    graph: &SimilarityGraph,
    labels: &LabelAssignment,
    config: &SolverConfig,
    iterations: usize,
    truth: Option<&[usize]>,
    f: &mut FeatureMatrix,
    start_step: u64,
    mut observe: O,
) -> Result<TrajectoryRecord>
where
    O: FnMut(usize, &FeatureMatrix),
{
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    config.validate()?;
    let n = graph.node_count();
    if let Some(t) = truth {
        if t.len() != n {
            return Err(Error::dims(format!("truth has {} entries, graph {n}", t.len())));
        }
    }
    let op = DiffusionOperator::build(graph, config.sigma)?;
    let kernel = WalkKernel::new(&op, config.epsilon)?;
    let y = labels.indicator(graph)?;
    f.check_shape(n, y.cols(), "F")?;
    let problem = SamplingProblem {
        op: &op,
        kernel: &kernel,
        y: &y,
        alpha: config.alpha()?,
        rule: config.update_rule,
    };
    let mut solver = SamplingSolver::new(problem, graph, config.schedule, config.policy, config.seed)?
        .starting_at(start_step);
    let mask = labels.mask(graph);
    let mut traj = if config.record_snapshots {
        TrajectoryRecord::with_snapshots()
    } else {
        TrajectoryRecord::new()
    };
    for it in 1..=iterations {
        solver.run(f, n as u64);
        if let Some(t) = truth {
            let pred = classify(f);
            traj.push(it, error_against(&pred, t, &mask)?, n);
            traj.push_snapshot(pred);
        }
        observe(it, f);
    }
    Ok(traj)
}

/// Runs `steps` updates of the focus cycle around the new node `v`. `f` must
/// already hold a (zero) row for `v`. Returns `v`'s predicted class.
pub fn track_new_node(
    f: &mut FeatureMatrix,
    graph: &SimilarityGraph,
    labels: &LabelAssignment,
    v: NodeId,
    config: &SolverConfig,
    steps: u64,
    start_step: u64,
) -> Result<usize> {
    config.validate()?;
    let row = graph.row_of(v).ok_or(Error::UnknownNode(v))?;
    if graph.neighbors(v)?.is_empty() {
        return Err(Error::IsolatedNode(v));
    }
    let op = DiffusionOperator::build(graph, config.sigma)?;
    let kernel = WalkKernel::new(&op, config.epsilon)?;
    let y = labels.indicator(graph)?;
    f.check_shape(graph.node_count(), y.cols(), "F")?;
    let problem = SamplingProblem {
        op: &op,
        kernel: &kernel,
        y: &y,
        alpha: config.alpha()?,
        rule: config.update_rule,
    };
    let mut solver = SamplingSolver::new(
        problem,
        graph,
        config.schedule,
        SelectionPolicy::NewNodeFocus(v),
        config.seed,
    )?
    .starting_at(start_step);
    solver.run(f, steps);
    Ok(crate::metrics::argmax(f.row(row)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{closed_form_solve, DENSE_LIMIT};
    use approx::assert_abs_diff_eq;

    fn pair_problem() -> (SimilarityGraph, DiffusionOperator, FeatureMatrix) {
        let mut g = SimilarityGraph::with_nodes(2);
        g.add_edge(NodeId(0), NodeId(1), 1.0).unwrap();
        let op = DiffusionOperator::build(&g, 0.5).unwrap();
        let mut y = FeatureMatrix::zeros(2, 1);
        y.set(0, 0, 1.0);
        (g, op, y)
    }

    #[test]
    fn schedules() {
        let dec: StepSchedule = "dec:100".parse().unwrap();
        assert_eq!(dec.eta(0), 0.5);
        assert_eq!(dec.eta(99), 0.5);
        assert_eq!(dec.eta(100), 1.0 / 3.0);
        assert_eq!(dec.to_string(), "dec:100");
        let c: StepSchedule = "const:0.001".parse().unwrap();
        assert_eq!(c.eta(123456), 0.001);
        assert!("const:0".parse::<StepSchedule>().is_err());
        assert!("const:1.5".parse::<StepSchedule>().is_err());
        assert!("dec:0".parse::<StepSchedule>().is_err());
        assert!("foo:1".parse::<StepSchedule>().is_err());
    }

    #[test]
    fn decreasing_schedule_is_harmonic_like() {
        // η_t >= c / (2c + t): the partial sums grow like c·ln(t) without
        // bound, while Σ η_t² <= Σ (c / t)² converges.
        let s = StepSchedule::Decreasing { period: 100 };
        let sum_to = |n: u64| (0..n).map(|t| s.eta(t)).sum::<f64>();
        let a = sum_to(100_000);
        let b = sum_to(1_000_000);
        assert!(b - a > 100.0 * (1_000_000f64 / 100_000f64).ln() * 0.9);
        let sq: f64 = (0..1_000_000).map(|t| s.eta(t).powi(2)).sum();
        assert!(sq < 100.0 * std::f64::consts::PI.powi(2) / 6.0 + 1.0);
    }

    #[test]
    fn zero_step_changes_nothing() {
        let (_, op, y) = pair_problem();
        let kernel = WalkKernel::new(&op, 0.1).unwrap();
        let mut f = FeatureMatrix::from_rows(&[vec![0.3], vec![0.9]]).unwrap();
        let before = f.clone();
        sampling_update(&mut f, 0, 1, 0.0, &op, &kernel, &y, 2.0 / 3.0);
        assert_eq!(f, before);
    }

    #[test]
    fn fixed_point_increment_is_zero() {
        let (_, op, y) = pair_problem();
        let alpha = 2.0 / 3.0;
        let star = closed_form_solve(&op, &y, alpha, DENSE_LIMIT).unwrap();
        // ε→0 so the ratio is 1 on the single neighbour.
        let kernel = WalkKernel::new(&op, 0.0).unwrap();
        for (i, j) in [(0, 1), (1, 0)] {
            let mut f = star.clone();
            sampling_update(&mut f, i, j, 0.5, &op, &kernel, &y, alpha);
            assert_abs_diff_eq!(f.get(i, 0), star.get(i, 0), epsilon = 1e-14);
        }
    }

    #[test]
    fn only_row_i_changes() {
        let (_, op, y) = pair_problem();
        let kernel = WalkKernel::new(&op, 0.1).unwrap();
        let mut f = FeatureMatrix::from_rows(&[vec![0.3, 0.1], vec![0.9, 0.4]]).unwrap();
        let y2 = FeatureMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let _ = y;
        sampling_update(&mut f, 0, 1, 0.5, &op, &kernel, &y2, 0.5);
        assert_eq!(f.row(1), &[0.9, 0.4]);
        let r = kernel.likelihood_ratio(0, 1);
        let h = op.row_sum(0);
        assert_abs_diff_eq!(f.get(0, 0), 0.3 + 0.5 * r * (0.5 * h * 0.9 - 0.3 + 0.5), epsilon = 1e-15);
        assert_abs_diff_eq!(f.get(0, 1), 0.1 + 0.5 * r * (0.5 * h * 0.4 - 0.1), epsilon = 1e-15);
    }

    #[test]
    fn printed_rule_constants() {
        let (_, op, y) = pair_problem();
        let kernel = WalkKernel::new(&op, 0.0).unwrap();
        let p = SamplingProblem { op: &op, kernel: &kernel, y: &y, alpha: 0.5, rule: UpdateRule::Printed };
        let f = FeatureMatrix::from_rows(&[vec![0.2], vec![0.6]]).unwrap();
        assert_abs_diff_eq!(p.bracket(&f, 0, 1, 0), op.row_sum(0) * 0.6 - 0.2 + 0.5, epsilon = 1e-15);
    }

    #[test]
    fn round_robin_covers_every_row() {
        let mut g = SimilarityGraph::with_nodes(5);
        for i in 0..4 {
            g.add_edge(NodeId(i), NodeId(i + 1), 1.0).unwrap();
        }
        let op = DiffusionOperator::build(&g, 0.5).unwrap();
        let kernel = WalkKernel::new(&op, 0.1).unwrap();
        let y = FeatureMatrix::zeros(5, 1);
        let problem = SamplingProblem { op: &op, kernel: &kernel, y: &y, alpha: 0.5, rule: UpdateRule::Consistent };
        let mut s = SamplingSolver::new(problem, &g, StepSchedule::Constant(0.1), SelectionPolicy::RoundRobin, 3).unwrap();
        let mut f = FeatureMatrix::zeros(5, 1);
        let picked: Vec<usize> = (0..15).map(|_| s.step(&mut f).0).collect();
        for w in picked.windows(5) {
            let mut seen = w.to_vec();
            seen.sort();
            assert_eq!(seen, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn focus_cycle_order() {
        let mut g = SimilarityGraph::with_nodes(5);
        g.add_edge(NodeId(4), NodeId(2), 1.0).unwrap();
        g.add_edge(NodeId(4), NodeId(0), 1.0).unwrap();
        g.add_edge(NodeId(0), NodeId(1), 1.0).unwrap();
        g.add_edge(NodeId(2), NodeId(3), 1.0).unwrap();
        assert_eq!(focus_cycle(&g, NodeId(4)).unwrap(), vec![4, 0, 2]);
        let op = DiffusionOperator::build(&g, 0.5).unwrap();
        let kernel = WalkKernel::new(&op, 0.1).unwrap();
        let y = FeatureMatrix::zeros(5, 1);
        let problem = SamplingProblem { op: &op, kernel: &kernel, y: &y, alpha: 0.5, rule: UpdateRule::Consistent };
        let mut s = SamplingSolver::new(
            problem,
            &g,
            StepSchedule::Constant(0.1),
            SelectionPolicy::NewNodeFocus(NodeId(4)),
            0,
        )
        .unwrap();
        let mut f = FeatureMatrix::zeros(5, 1);
        let picked: Vec<usize> = (0..7).map(|_| s.step(&mut f).0).collect();
        assert_eq!(picked, vec![4, 0, 2, 4, 0, 2, 4]);

        let mut iso = g.clone();
        let lone = iso.add_node().unwrap();
        assert!(matches!(focus_cycle(&iso, lone), Err(Error::IsolatedNode(_))));
    }

    #[test]
    fn zero_iterations_leave_labels() {
        let (g, _, _) = pair_problem();
        let mut labels = LabelAssignment::new(1);
        labels.assign(NodeId(0), 0).unwrap();
        let (f, traj) = run_sampling(&g, &labels, &SolverConfig::default(), 0, Some(&[0, 0])).unwrap();
        assert_eq!(f, labels.indicator(&g).unwrap());
        assert!(traj.rows.is_empty());
    }

    #[test]
    fn empty_graph_rejected() {
        let g = SimilarityGraph::new();
        let labels = LabelAssignment::new(1);
        assert!(matches!(
            run_sampling(&g, &labels, &SolverConfig::default(), 1, None),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn new_node_gains_only_supported_class() {
        // Two class-0 hubs and two class-2 hubs; the new node touches only the
        // class-2 pair.
        let mut g = SimilarityGraph::with_nodes(4);
        g.add_edge(NodeId(0), NodeId(1), 1.0).unwrap();
        g.add_edge(NodeId(2), NodeId(3), 1.0).unwrap();
        let mut labels = LabelAssignment::new(3);
        labels.assign(NodeId(0), 0).unwrap();
        labels.assign(NodeId(2), 2).unwrap();
        let mut f = labels.indicator(&g).unwrap();
        let v = g.add_node().unwrap();
        g.add_edge(v, NodeId(2), 1.0).unwrap();
        g.add_edge(v, NodeId(3), 1.0).unwrap();
        f.push_zero_row();
        let config = SolverConfig { schedule: StepSchedule::Constant(0.05), seed: 5, ..SolverConfig::default() };

        let mut still = f.clone();
        track_new_node(&mut still, &g, &labels, v, &config, 0, 0).unwrap();
        assert_eq!(still.row(4), &[0.0, 0.0, 0.0]);

        let mut history = Vec::new();
        for round in 0..40u64 {
            let cfg = SolverConfig { seed: round, ..config.clone() };
            let class = track_new_node(&mut f, &g, &labels, v, &cfg, 3, round * 3).unwrap();
            history.push(f.get(4, 2));
            assert_eq!(f.get(4, 0), 0.0);
            assert_eq!(f.get(4, 1), 0.0);
            if f.get(4, 2) > 0.0 {
                assert_eq!(class, 2);
            }
        }
        assert!(history[39] > history[4] && history[4] > 0.0, "{history:?}");
    }
}

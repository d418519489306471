//! Block model whose node population follows an M/M/K/K queue: Poisson
//! arrivals, exponential lifetimes, and a hard cap at which arrivals are
//! blocked. The sampling solver runs alongside, one step per time unit.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use ordered_float::OrderedFloat;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;

use super::{check_simplex, generate_sbm, pick_labeled_nodes};
use crate::error::{Error, Result};
use crate::graph::{LabelAssignment, LabeledGraph, NodeId, SimilarityGraph};
use crate::metrics::{classify, error_against, ErrorSummary, TrajectoryRecord};
use crate::operators::{DiffusionOperator, WalkKernel};
use crate::sampling::{SamplingProblem, SolverConfig};

/// Density presets; each scales the within-class edge probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Density {
    High,
    Medium,
    Low,
}

impl Density {
    pub fn p_in_scale(self) -> f64 {
        match self {
            Density::High => 2.0,
            Density::Medium => 1.0,
            Density::Low => 0.5,
        }
    }
}

impl std::str::FromStr for Density {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hcd" | "high" => Ok(Density::High),
            "mcd" | "medium" => Ok(Density::Medium),
            "lcd" | "low" => Ok(Density::Low),
            _ => Err(Error::invalid(format!("unknown density '{s}' (hcd, mcd, lcd)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicSbmSpec {
    pub class_probs: Vec<f64>,
    pub p_in: f64,
    pub p_out: f64,
    /// Arrivals per time unit.
    pub arrival_rate: f64,
    /// Per-node departure rate; mean lifetime is its inverse.
    pub departure_rate: f64,
    pub cap: usize,
    pub initial_size: usize,
    pub labeled_per_class: usize,
    /// Labelled nodes never depart.
    pub permanent_labels: bool,
    pub seed: u64,
}

impl DynamicSbmSpec {
    /// Three equiprobable classes, `p_in = 0.1`, `p_out = 0.005`, cap 1000,
    /// `λ = 5e-5`, `μ = 1e-7`, 500 initial nodes, two labels per class.
    pub fn with_defaults(seed: u64) -> Self {
        Self {
            class_probs: vec![1.0 / 3.0; 3],
            p_in: 0.1,
            p_out: 0.005,
            arrival_rate: 5e-5,
            departure_rate: 1e-7,
            cap: 1000,
            initial_size: 500,
            labeled_per_class: 2,
            permanent_labels: false,
            seed,
        }
    }

    pub fn with_density(mut self, density: Density) -> Self {
        self.p_in = (self.p_in * density.p_in_scale()).min(1.0);
        self
    }

    pub fn num_classes(&self) -> usize {
        self.class_probs.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_probs.is_empty() {
            return Err(Error::invalid("at least one class is required"));
        }
        check_simplex(&self.class_probs)?;
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must be in [0,1], got {p}")));
            }
        }
        if self.p_in <= self.p_out {
            return Err(Error::invalid(format!(
                "p_in ({}) must exceed p_out ({})",
                self.p_in, self.p_out
            )));
        }
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            return Err(Error::invalid("arrival rate must be positive"));
        }
        if !(self.departure_rate > 0.0 && self.departure_rate.is_finite()) {
            return Err(Error::invalid("departure rate must be positive"));
        }
        if self.cap == 0 {
            return Err(Error::invalid("cap must be at least 1"));
        }
        if self.initial_size > self.cap {
            return Err(Error::TooLarge {
                n: self.initial_size,
                limit: self.cap,
            });
        }
        Ok(())
    }
}

/// How a departing labelled node was replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplacementSource {
    /// Random same-class neighbour of the departing node.
    Neighbor,
    /// Highest-degree unlabelled node of the class.
    HighestDegree,
    /// No candidate; the class is one label short until one arrives.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Replacement {
    pub class: usize,
    pub old: NodeId,
    pub new: Option<NodeId>,
    pub source: ReplacementSource,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Arrival { node: NodeId, class: usize },
    ArrivalBlocked { class: usize },
    Departure { node: NodeId, class: usize },
    LabelReplacement(Replacement),
    /// A class short of labels received one.
    LabelRefill { node: NodeId, class: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationEvent {
    pub time: f64,
    pub kind: EventKind,
}

impl fmt::Display for SimulationEvent {
    /// `<time> <kind> <details>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.time;
        match self.kind {
            EventKind::Arrival { node, class } => write!(f, "{t} arrival node={node} class={class}"),
            EventKind::ArrivalBlocked { class } => write!(f, "{t} blocked class={class}"),
            EventKind::Departure { node, class } => {
                write!(f, "{t} departure node={node} class={class}")
            }
            EventKind::LabelReplacement(r) => {
                let new = r.new.map_or("none".to_string(), |n| n.to_string());
                let src = match r.source {
                    ReplacementSource::Neighbor => "neighbor",
                    ReplacementSource::HighestDegree => "highest_degree",
                    ReplacementSource::None => "none",
                };
                write!(f, "{t} label_replacement class={} old={} new={new} via={src}", r.class, r.old)
            }
            EventKind::LabelRefill { node, class } => {
                write!(f, "{t} label_refill node={node} class={class}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub trajectory: TrajectoryRecord,
    pub events: Vec<SimulationEvent>,
    /// `(step, size)` at every change of the population, starting at step 0.
    pub size_changes: Vec<(u64, usize)>,
    pub steps: u64,
    pub final_state: LabeledGraph,
    /// Planted class per row of `final_state`.
    pub final_truth: Vec<usize>,
}

impl SimulationOutput {
    /// Population size averaged over steps `from..to`.
    pub fn time_average_size(&self, from: u64, to: u64) -> f64 {
        assert!(from < to, "empty averaging window");
        let mut total = 0.0;
        for (k, &(start, size)) in self.size_changes.iter().enumerate() {
            let end = self.size_changes.get(k + 1).map_or(u64::MAX, |c| c.0);
            let (s, e) = (start.max(from), end.min(to));
            if e > s {
                total += (e - s) as f64 * size as f64;
            }
        }
        total / (to - from) as f64
    }

    pub fn write_events<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.events {
            writeln!(out, "{e}")?;
        }
        Ok(())
    }
}

/// Moves the label of `departing` to another member of its class: a random
/// same-class unlabelled neighbour, else the highest-degree unlabelled class
/// member (ties to the lower id). Call before the node is removed.
/// `class_of` gives planted classes by id.
pub fn replace_labeled_node<R: Rng + ?Sized>(
    graph: &SimilarityGraph,
    labels: &mut LabelAssignment,
    class_of: &HashMap<NodeId, usize>,
    departing: NodeId,
    rng: &mut R,
) -> Result<Replacement> {
    let class = labels
        .remove(departing)
        .ok_or_else(|| Error::invalid(format!("node {departing} is not labelled")))?;
    let eligible = |n: NodeId| n != departing && class_of.get(&n) == Some(&class) && !labels.is_labeled(n);
    let near: Vec<NodeId> = graph
        .neighbors(departing)?
        .iter()
        .map(|&(n, _)| n)
        .filter(|&n| eligible(n))
        .collect();
    let (new, source) = if let Some(&n) = near.choose(rng) {
        (Some(n), ReplacementSource::Neighbor)
    } else {
        match highest_degree_member(graph, &eligible) {
            Some(n) => (Some(n), ReplacementSource::HighestDegree),
            None => (None, ReplacementSource::None),
        }
    };
    if let Some(n) = new {
        labels.assign(n, class)?;
    }
    Ok(Replacement {
        class,
        old: departing,
        new,
        source,
    })
}

fn highest_degree_member(graph: &SimilarityGraph, eligible: &dyn Fn(NodeId) -> bool) -> Option<NodeId> {
    let mut best: Option<(f64, NodeId)> = None;
    for (row, &id) in graph.ids().iter().enumerate() {
        if !eligible(id) {
            continue;
        }
        let d = graph.row_degree(row);
        // ids are ascending, so a strict comparison keeps the lower id on ties.
        if best.is_none_or(|(bd, _)| d > bd) {
            best = Some((d, id));
        }
    }
    best.map(|b| b.1)
}

struct Sim<'a> {
    spec: &'a DynamicSbmSpec,
    state: LabeledGraph,
    class_of: HashMap<NodeId, usize>,
    departures: BinaryHeap<Reverse<(OrderedFloat<f64>, NodeId)>>,
    next_arrival: f64,
    events: Vec<SimulationEvent>,
    rng: ChaCha8Rng,
    /// Separate stream for replacement choices.
    label_rng: ChaCha8Rng,
    classes: WeightedIndex<f64>,
    arrival: Exp<f64>,
    lifetime: Exp<f64>,
}

impl Sim<'_> {
    /// Every node draws a lifetime, labelled or not, so that runs with and
    /// without permanent labels consume the event stream identically.
    fn schedule_departure(&mut self, node: NodeId, now: f64) {
        let t = now + self.lifetime.sample(&mut self.rng);
        self.departures.push(Reverse((OrderedFloat(t), node)));
    }

    fn next_event_time(&self) -> f64 {
        let dep = self.departures.peek().map_or(f64::INFINITY, |r| r.0 .0 .0);
        dep.min(self.next_arrival)
    }

    fn arrive(&mut self, time: f64) -> Result<()> {
        let class = self.classes.sample(&mut self.rng);
        if self.state.graph.node_count() >= self.spec.cap {
            self.events.push(SimulationEvent {
                time,
                kind: EventKind::ArrivalBlocked { class },
            });
            return Ok(());
        }
        let node = self.state.add_node()?;
        self.class_of.insert(node, class);
        let mut wiring = ChaCha8Rng::seed_from_u64(self.rng.random());
        let existing: Vec<NodeId> = self.state.graph.ids().to_vec();
        for u in existing {
            if u == node {
                continue;
            }
            let p = if self.class_of[&u] == class {
                self.spec.p_in
            } else {
                self.spec.p_out
            };
            if wiring.random_bool(p) {
                self.state.graph.add_edge(node, u, 1.0)?;
            }
        }
        self.events.push(SimulationEvent {
            time,
            kind: EventKind::Arrival { node, class },
        });
        self.schedule_departure(node, time);
        Ok(())
    }

    fn depart(&mut self, time: f64, node: NodeId) -> Result<()> {
        if self.spec.permanent_labels && self.state.labels.is_labeled(node) {
            return Ok(());
        }
        let class = self.class_of[&node];
        self.events.push(SimulationEvent {
            time,
            kind: EventKind::Departure { node, class },
        });
        if self.state.labels.is_labeled(node) {
            let r = replace_labeled_node(
                &self.state.graph,
                &mut self.state.labels,
                &self.class_of,
                node,
                &mut self.label_rng,
            )?;
            self.events.push(SimulationEvent {
                time,
                kind: EventKind::LabelReplacement(r),
            });
        }
        self.state.remove_node(node)?;
        self.class_of.remove(&node);
        Ok(())
    }

    /// Tops up classes left short of labels by earlier departures.
    fn refill(&mut self, time: f64) {
        for class in 0..self.spec.num_classes() {
            while self.state.labels.count_in_class(class) < self.spec.labeled_per_class {
                let labels = &self.state.labels;
                let class_of = &self.class_of;
                let eligible = |n: NodeId| class_of.get(&n) == Some(&class) && !labels.is_labeled(n);
                let Some(n) = highest_degree_member(&self.state.graph, &eligible) else {
                    break;
                };
                self.state.labels.assign(n, class).expect("class in range");
                self.events.push(SimulationEvent {
                    time,
                    kind: EventKind::LabelRefill { node: n, class },
                });
            }
        }
    }

    /// Handles every event due at or before `now`, then refills labels.
    /// Returns whether anything happened.
    fn process_until(&mut self, now: f64) -> Result<bool> {
        let mut changed = false;
        while self.next_event_time() <= now {
            let dep = self.departures.peek().map_or(f64::INFINITY, |r| r.0 .0 .0);
            if dep <= self.next_arrival {
                let Reverse((time, node)) = self.departures.pop().expect("peeked");
                self.depart(time.0, node)?;
            } else {
                let time = self.next_arrival;
                self.arrive(time)?;
                self.next_arrival = time + self.arrival.sample(&mut self.rng);
            }
            changed = true;
        }
        if changed {
            self.refill(now);
        }
        Ok(changed)
    }

    fn truth(&self) -> Vec<usize> {
        self.state.graph.ids().iter().map(|id| self.class_of[id]).collect()
    }
}

fn init_sim(spec: &DynamicSbmSpec) -> Result<Sim<'_>> {
    spec.validate()?;
    let k = spec.num_classes();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let classes = WeightedIndex::new(&spec.class_probs)
        .map_err(|e| Error::invalid(format!("class_probs: {e}")))?;

    // Initial population: planted classes drawn from the mixture, grouped
    // into consecutive blocks so the static generator can wire them.
    let mut sizes = vec![0usize; k];
    for _ in 0..spec.initial_size {
        sizes[classes.sample(&mut rng)] += 1;
    }
    let (graph, truth0) = generate_sbm(&sizes, spec.p_in, spec.p_out, rng.random())?;
    let mut graph_capped = SimilarityGraph::with_cap(spec.cap);
    for _ in 0..graph.node_count() {
        graph_capped.add_node()?;
    }
    for (u, v, w) in graph.edges() {
        graph_capped.add_edge(u, v, w)?;
    }
    let mut labels = LabelAssignment::new(k);
    if spec.labeled_per_class > 0 && spec.initial_size > 0 {
        let picked = pick_labeled_nodes(&graph_capped, &truth0, spec.labeled_per_class)?;
        for (id, c) in picked.iter() {
            labels.assign(id, c)?;
        }
    }
    let class_of: HashMap<NodeId, usize> = graph_capped
        .ids()
        .iter()
        .zip(&truth0)
        .map(|(&id, &c)| (id, c))
        .collect();

    let mut label_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    label_rng.set_stream(2);
    let arrival = Exp::new(spec.arrival_rate).map_err(|e| Error::invalid(format!("arrival rate: {e}")))?;
    let lifetime =
        Exp::new(spec.departure_rate).map_err(|e| Error::invalid(format!("departure rate: {e}")))?;
    let mut sim = Sim {
        spec,
        state: LabeledGraph::new(graph_capped, labels)?,
        class_of,
        departures: BinaryHeap::new(),
        next_arrival: 0.0,
        events: Vec::new(),
        classes,
        arrival,
        lifetime,
        rng,
        label_rng,
    };
    sim.next_arrival = sim.arrival.sample(&mut sim.rng);
    let ids: Vec<NodeId> = sim.state.graph.ids().to_vec();
    for id in ids {
        sim.schedule_departure(id, 0.0);
    }
    sim.refill(0.0);

    Ok(sim)
}

/// Runs the dynamic block model for `steps` time units with one sampling
/// step per unit. Every `cap` steps (one iteration) the classification error
/// over present unlabelled nodes is recorded. The schedule and selection of
/// `config` apply; node selection always follows the walk.
pub fn simulate_dynamic_sbm(
    spec: &DynamicSbmSpec,
    config: &SolverConfig,
    steps: u64,
) -> Result<SimulationOutput> {
    config.validate()?;
    let alpha = config.alpha()?;
    let mut sim = init_sim(spec)?;
    let mut walk_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trajectory = if config.record_snapshots {
        TrajectoryRecord::with_snapshots()
    } else {
        TrajectoryRecord::new()
    };
    let mut size_changes = vec![(0u64, sim.state.graph.node_count())];

    let rebuild = |state: &LabeledGraph| -> Result<(DiffusionOperator, WalkKernel, crate::graph::FeatureMatrix)> {
        let op = DiffusionOperator::build_allow_isolated(&state.graph, config.sigma)?;
        let kernel = WalkKernel::new(&op, config.epsilon)?;
        let y = state.labels.indicator(&state.graph)?;
        Ok((op, kernel, y))
    };
    let (mut op, mut kernel, mut y) = rebuild(&sim.state)?;
    let mut walker: Option<NodeId> = (!sim.state.graph.is_empty()).then(|| {
        let n = sim.state.graph.node_count();
        sim.state.graph.id_at(walk_rng.random_range(0..n))
    });

    for t in 0..steps {
        let now = t as f64;
        if sim.process_until(now)? {
            (op, kernel, y) = rebuild(&sim.state)?;
            let n = sim.state.graph.node_count();
            if size_changes.last().map(|s| s.1) != Some(n) {
                size_changes.push((t, n));
            }
            if walker.is_none_or(|w| !sim.state.graph.contains(w)) {
                walker = (n > 0).then(|| sim.state.graph.id_at(walk_rng.random_range(0..n)));
            }
        }

        if let Some(w) = walker {
            let i = sim.state.graph.row_of(w).expect("walker is live");
            let (j, ratio) = kernel.sample(i, &mut walk_rng);
            let problem = SamplingProblem {
                op: &op,
                kernel: &kernel,
                y: &y,
                alpha,
                rule: config.update_rule,
            };
            problem.update_with_ratio(&mut sim.state.features, i, j, config.schedule.eta(t), ratio);
            walker = Some(sim.state.graph.id_at(j));
        }

        if (t + 1) % spec.cap as u64 == 0 {
            let iteration = ((t + 1) / spec.cap as u64) as usize;
            let pred = classify(&sim.state.features);
            let truth = sim.truth();
            let mask = sim.state.labels.mask(&sim.state.graph);
            let err = if pred.is_empty() {
                ErrorSummary {
                    count: 0,
                    total: 0,
                    percentage: 0.0,
                }
            } else {
                error_against(&pred, &truth, &mask)?
            };
            trajectory.push(iteration, err, sim.state.graph.node_count());
            trajectory.push_snapshot(pred);
        }
    }

    let final_truth = sim.truth();
    Ok(SimulationOutput {
        trajectory,
        events: sim.events,
        size_changes,
        steps,
        final_state: sim.state,
        final_truth,
    })
}

/// The arrival/departure process of [`simulate_dynamic_sbm`] without the
/// solver. Events, labels and sizes match the co-simulation with the same
/// spec exactly; the trajectory is empty.
pub fn simulate_population(spec: &DynamicSbmSpec, steps: u64) -> Result<SimulationOutput> {
    let mut sim = init_sim(spec)?;
    let mut size_changes = vec![(0u64, sim.state.graph.node_count())];
    while steps > 0 && sim.next_event_time() <= (steps - 1) as f64 {
        let t = sim.next_event_time().ceil() as u64;
        sim.process_until(t as f64)?;
        let n = sim.state.graph.node_count();
        if size_changes.last().map(|s| s.1) != Some(n) {
            size_changes.push((t, n));
        }
    }
    let final_truth = sim.truth();
    Ok(SimulationOutput {
        trajectory: TrajectoryRecord::new(),
        events: sim.events,
        size_changes,
        steps,
        final_state: sim.state,
        final_truth,
    })
}

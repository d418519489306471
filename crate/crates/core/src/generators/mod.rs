//! Synthetic graphs: geometric Gaussian-mixture graphs, stochastic block
//! models, and the dynamic block model driven by an M/M/K/K arrival process.

mod dynamic;
mod tracking;

pub use dynamic::{
    replace_labeled_node, simulate_dynamic_sbm, simulate_population, Density, DynamicSbmSpec, EventKind, Replacement,
    ReplacementSource, SimulationEvent, SimulationOutput,
};
pub use tracking::{drop_isolated, tracking_experiment, TrackingOutcome, TrackingSpec};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};
use crate::graph::{LabelAssignment, NodeId, SimilarityGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureSpec {
    pub n: usize,
    pub class_probs: Vec<f64>,
    pub centers: Vec<[f64; 2]>,
    pub std_devs: Vec<f64>,
    /// Nodes at Euclidean distance `<= radius` are joined.
    pub radius: f64,
    pub seed: u64,
}

impl GaussianMixtureSpec {
    /// Three classes with probabilities 0.33/0.33/0.34, centres (0,0), (4,0),
    /// (2,3.5), unit standard deviation and radius 1.
    pub fn with_defaults(n: usize, seed: u64) -> Self {
        Self {
            n,
            class_probs: vec![0.33, 0.33, 0.34],
            centers: vec![[0.0, 0.0], [4.0, 0.0], [2.0, 3.5]],
            std_devs: vec![1.0; 3],
            radius: 1.0,
            seed,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.class_probs.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.class_probs.len();
        if k == 0 || self.centers.len() != k || self.std_devs.len() != k {
            return Err(Error::invalid(format!(
                "class_probs ({k}), centers ({}) and std_devs ({}) must have equal non-zero length",
                self.centers.len(),
                self.std_devs.len()
            )));
        }
        check_simplex(&self.class_probs)?;
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if self.radius.is_nan() || self.radius < 0.0 {
            return Err(Error::invalid(format!("radius must be non-negative, got {}", self.radius)));
        }
        if self.std_devs.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::invalid("std_devs must be finite and non-negative"));
        }
        Ok(())
    }

    /// Draws one `(class, position)` from the mixture.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(usize, [f64; 2])> {
        let classes = WeightedIndex::new(&self.class_probs)
            .map_err(|e| Error::invalid(format!("class_probs: {e}")))?;
        let c = classes.sample(rng);
        let normal = Normal::new(0.0, self.std_devs[c])
            .map_err(|e| Error::invalid(format!("std_dev: {e}")))?;
        let p = [
            self.centers[c][0] + normal.sample(rng),
            self.centers[c][1] + normal.sample(rng),
        ];
        Ok((c, p))
    }
}

pub(crate) fn check_simplex(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| p.is_nan() || *p < 0.0) {
        return Err(Error::invalid("class probabilities must be non-negative"));
    }
    let s: f64 = probs.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("class probabilities sum to {s}, not 1")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct GaussianMixtureGraph {
    pub graph: SimilarityGraph,
    /// Planted class per row.
    pub truth: Vec<usize>,
    pub positions: Vec<[f64; 2]>,
    pub connected: bool,
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Unit-weight geometric graph over points drawn from the mixture.
pub fn generate_gaussian_mixture(spec: &GaussianMixtureSpec) -> Result<GaussianMixtureGraph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut truth = Vec::with_capacity(spec.n);
    let mut positions = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let (c, p) = spec.sample_point(&mut rng)?;
        truth.push(c);
        positions.push(p);
    }
    let mut graph = SimilarityGraph::with_nodes(spec.n);
    let r2 = spec.radius * spec.radius;
    for i in 0..spec.n {
        for j in i + 1..spec.n {
            if dist2(positions[i], positions[j]) <= r2 {
                graph.add_edge(NodeId(i), NodeId(j), 1.0)?;
            }
        }
    }
    let connected = graph.is_connected() && graph.isolated_nodes().is_empty();
    Ok(GaussianMixtureGraph {
        graph,
        truth,
        positions,
        connected,
    })
}

/// Adds a node at `position` joined to every existing node within `radius`.
pub fn insert_geometric_node(
    mixture: &mut GaussianMixtureGraph,
    class: usize,
    position: [f64; 2],
    radius: f64,
) -> Result<NodeId> {
    let v = mixture.graph.add_node()?;
    let r2 = radius * radius;
    for row in 0..mixture.positions.len() {
        if dist2(position, mixture.positions[row]) <= r2 {
            let u = mixture.graph.id_at(row);
            mixture.graph.add_edge(v, u, 1.0)?;
        }
    }
    mixture.truth.push(class);
    mixture.positions.push(position);
    Ok(v)
}

/// Block model with consecutive blocks of the given sizes and unit weights.
pub fn generate_sbm(
    sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(SimilarityGraph, Vec<usize>)> {
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("{name} must be in [0,1], got {p}")));
        }
    }
    let truth: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
        .collect();
    let n = truth.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graph = SimilarityGraph::with_nodes(n);
    for i in 0..n {
        for j in i + 1..n {
            let p = if truth[i] == truth[j] { p_in } else { p_out };
            if rng.random_bool(p) {
                graph.add_edge(NodeId(i), NodeId(j), 1.0)?;
            }
        }
    }
    Ok((graph, truth))
}

/// Labels the `per_class` highest-degree nodes of every class; ties go to
/// the lower id. `truth` is row-aligned with `graph`.
pub fn pick_labeled_nodes(
    graph: &SimilarityGraph,
    truth: &[usize],
    per_class: usize,
) -> Result<LabelAssignment> {
    if truth.len() != graph.node_count() {
        return Err(Error::dims(format!(
            "truth has {} entries, graph {}",
            truth.len(),
            graph.node_count()
        )));
    }
    let k = truth.iter().max().map_or(0, |m| m + 1);
    let mut labels = LabelAssignment::new(k);
    for class in 0..k {
        let mut members: Vec<usize> = (0..truth.len()).filter(|&r| truth[r] == class).collect();
        if members.len() < per_class {
            return Err(Error::ClassTooSmall {
                class,
                available: members.len(),
                requested: per_class,
            });
        }
        members.sort_by(|&a, &b| {
            graph
                .row_degree(b)
                .total_cmp(&graph.row_degree(a))
                .then(graph.id_at(a).cmp(&graph.id_at(b)))
        });
        for &r in members.iter().take(per_class) {
            labels.assign(graph.id_at(r), class)?;
        }
    }
    Ok(labels)
}

//! Python bindings: the graph type, the bundled dataset, both solvers,
//! the generators and the dynamic block-model simulator.
//!
//! Feature matrices cross the boundary as lists of rows. Labels are lists of
//! `(node_id, class)` pairs.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gssl::generators::{self, Density, DynamicSbmSpec, GaussianMixtureSpec};
use gssl::io::labels_from_pairs;
use gssl::{
    DiffusionOperator, FeatureMatrix, LabelAssignment, NodeId, SelectionPolicy, SolverConfig,
    StepSchedule, UpdateRule,
};

fn err(e: gssl::Error) -> PyErr {
    match e {
        gssl::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rows(f: &FeatureMatrix) -> Vec<Vec<f64>> {
    (0..f.rows()).map(|r| f.row(r).to_vec()).collect()
}

fn label_set(labels: &[(usize, usize)], num_classes: Option<usize>) -> PyResult<LabelAssignment> {
    let pairs: Vec<(NodeId, usize)> = labels.iter().map(|&(i, k)| (NodeId(i), k)).collect();
    labels_from_pairs(&pairs, num_classes).map_err(err)
}

/// `(iteration, error_count, error_pct, n_nodes)`.
type TrajectoryTuple = (usize, usize, f64, usize);
type Point = (f64, f64);

fn label_pairs(labels: &LabelAssignment) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = labels.iter().map(|(id, k)| (id.0, k)).collect();
    out.sort_unstable();
    out
}

#[pyclass(name = "Graph", module = "pygssl", from_py_object)]
#[derive(Clone)]
pub struct PyGraph {
    inner: gssl::SimilarityGraph,
}

#[pymethods]
impl PyGraph {
    /// Empty graph, optionally with a node cap.
    #[new]
    #[pyo3(signature = (cap=None))]
    fn new(cap: Option<usize>) -> Self {
        let inner = match cap {
            Some(c) => gssl::SimilarityGraph::with_cap(c),
            None => gssl::SimilarityGraph::new(),
        };
        Self { inner }
    }

    /// `n` nodes with ids `0..n` and the given weighted edges.
    #[staticmethod]
    fn from_edges(n: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let mut inner = gssl::SimilarityGraph::with_nodes(n);
        for (i, j, w) in edges {
            inner.add_edge(NodeId(i), NodeId(j), w).map_err(err)?;
        }
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, unit_weights=false))]
    fn load(path: &str, unit_weights: bool) -> PyResult<Self> {
        let inner = gssl::io::load_edge_list(path, unit_weights).map_err(err)?;
        Ok(Self { inner })
    }

    fn add_node(&mut self) -> PyResult<usize> {
        self.inner.add_node().map(|id| id.0).map_err(err)
    }

    /// Removes the node and its edges; returns the row it occupied.
    fn remove_node(&mut self, id: usize) -> PyResult<usize> {
        self.inner.remove_node(NodeId(id)).map_err(err)
    }

    fn add_edge(&mut self, i: usize, j: usize, w: f64) -> PyResult<()> {
        self.inner.add_edge(NodeId(i), NodeId(j), w).map_err(err)
    }

    fn degree(&self, id: usize) -> PyResult<f64> {
        self.inner.degree(NodeId(id)).map_err(err)
    }

    fn neighbors(&self, id: usize) -> PyResult<Vec<(usize, f64)>> {
        let nb = self.inner.neighbors(NodeId(id)).map_err(err)?;
        Ok(nb.iter().map(|&(u, w)| (u.0, w)).collect())
    }

    fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.inner.weight(NodeId(i), NodeId(j))
    }

    /// Node ids in row order.
    fn ids(&self) -> Vec<usize> {
        self.inner.ids().iter().map(|id| id.0).collect()
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().map(|(u, v, w)| (u.0, v.0, w)).collect()
    }

    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn __len__(&self) -> usize {
        self.inner.node_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(nodes={}, edges={})",
            self.inner.node_count(),
            self.inner.edge_count()
        )
    }
}

/// The Les Misérables co-appearance graph with its seed labels and classes.
#[pyfunction]
#[pyo3(signature = (weighted=false))]
fn les_miserables(py: Python<'_>, weighted: bool) -> PyResult<Bound<'_, PyDict>> {
    let ds = if weighted {
        gssl::datasets::les_miserables_weighted()
    } else {
        gssl::datasets::les_miserables()
    };
    let d = PyDict::new(py);
    d.set_item("labels", label_pairs(&ds.labels))?;
    d.set_item("num_classes", ds.labels.num_classes())?;
    d.set_item("truth", ds.truth)?;
    d.set_item("node_names", ds.node_names)?;
    d.set_item("class_names", ds.class_names)?;
    d.set_item("graph", PyGraph { inner: ds.graph })?;
    Ok(d)
}

/// Dense closed-form solution; limited to small graphs.
#[pyfunction]
#[pyo3(signature = (graph, labels, num_classes=None, sigma=0.5, mu=1.0))]
fn closed_form(
    graph: &PyGraph,
    labels: Vec<(usize, usize)>,
    num_classes: Option<usize>,
    sigma: f64,
    mu: f64,
) -> PyResult<Vec<Vec<f64>>> {
    let labels = label_set(&labels, num_classes)?;
    let op = DiffusionOperator::build(&graph.inner, sigma).map_err(err)?;
    let y = labels.indicator(&graph.inner).map_err(err)?;
    let alpha = gssl::alpha_from_mu(mu).map_err(err)?;
    let f = gssl::closed_form_solve(&op, &y, alpha, 5000).map_err(err)?;
    Ok(rows(&f))
}

/// Power iteration from `F = Y`. Returns `(F, report)`.
#[pyfunction]
#[pyo3(signature = (graph, labels, num_classes=None, sigma=0.5, mu=1.0, tol=1e-10, max_iters=1000, threads=None))]
#[allow(clippy::too_many_arguments)]
fn solve_power<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    labels: Vec<(usize, usize)>,
    num_classes: Option<usize>,
    sigma: f64,
    mu: f64,
    tol: f64,
    max_iters: usize,
    threads: Option<usize>,
) -> PyResult<(Vec<Vec<f64>>, Bound<'py, PyDict>)> {
    let labels = label_set(&labels, num_classes)?;
    let g = &graph.inner;
    let run = || -> gssl::Result<_> {
        let op = DiffusionOperator::build(g, sigma)?;
        let y = labels.indicator(g)?;
        let alpha = gssl::alpha_from_mu(mu)?;
        gssl::power_solve(&y, &op, &y, alpha, tol, max_iters)
    };
    let (f, report) = py
        .detach(|| match threads {
            Some(t) => gssl::power::with_threads(t, run).and_then(|r| r),
            None => run(),
        })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("iterations", report.iterations)?;
    d.set_item("converged", report.converged)?;
    d.set_item("final_step", report.final_step)?;
    d.set_item("ratios", report.ratios)?;
    Ok((rows(&f), d))
}

/// Random-walk sampling solver run for `iterations * N` steps from `F = Y`.
/// With `truth` (row-aligned classes) the per-iteration error trajectory is
/// returned as `(iteration, error_count, error_pct, n_nodes)` tuples.
#[pyfunction]
#[pyo3(signature = (graph, labels, iterations, num_classes=None, sigma=0.5, mu=1.0, epsilon=0.1,
                    schedule="dec:100", policy="mcmc", seed=0, truth=None, printed_update=false))]
#[allow(clippy::too_many_arguments)]
fn solve_sampling(
    py: Python<'_>,
    graph: &PyGraph,
    labels: Vec<(usize, usize)>,
    iterations: usize,
    num_classes: Option<usize>,
    sigma: f64,
    mu: f64,
    epsilon: f64,
    schedule: &str,
    policy: &str,
    seed: u64,
    truth: Option<Vec<usize>>,
    printed_update: bool,
) -> PyResult<(Vec<Vec<f64>>, Vec<TrajectoryTuple>)> {
    let labels = label_set(&labels, num_classes)?;
    let policy = match policy {
        "mcmc" => SelectionPolicy::Mcmc,
        "round-robin" => SelectionPolicy::RoundRobin,
        other => return Err(PyValueError::new_err(format!("unknown policy '{other}'"))),
    };
    let config = SolverConfig {
        sigma,
        mu,
        epsilon,
        schedule: schedule.parse::<StepSchedule>().map_err(err)?,
        policy,
        update_rule: if printed_update { UpdateRule::Printed } else { UpdateRule::Consistent },
        seed,
        record_snapshots: false,
    };
    let g = &graph.inner;
    let (f, traj) = py
        .detach(|| gssl::run_sampling(g, &labels, &config, iterations, truth.as_deref()))
        .map_err(err)?;
    let traj = traj
        .rows
        .iter()
        .map(|r| (r.iteration, r.error_count, r.error_pct, r.n_nodes))
        .collect();
    Ok((rows(&f), traj))
}

/// Row-wise argmax.
#[pyfunction]
fn classify(f: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
    let f = FeatureMatrix::from_rows(&f).map_err(err)?;
    Ok(gssl::classify(&f))
}

/// `(count, total, percentage)` of misclassified nodes outside `labeled`.
#[pyfunction]
fn error_rate(pred: Vec<usize>, truth: Vec<usize>, labeled: Vec<bool>) -> PyResult<(usize, usize, f64)> {
    let e = gssl::error_against(&pred, &truth, &labeled).map_err(err)?;
    Ok((e.count, e.total, e.percentage))
}

/// Three-class Gaussian mixture in the plane joined within `radius`.
/// Returns `(graph, truth, positions)`.
#[pyfunction]
#[pyo3(signature = (n, seed=0, radius=None, drop_isolated=true))]
fn generate_gaussian(
    n: usize,
    seed: u64,
    radius: Option<f64>,
    drop_isolated: bool,
) -> PyResult<(PyGraph, Vec<usize>, Vec<Point>)> {
    let mut spec = GaussianMixtureSpec::with_defaults(n, seed);
    if let Some(r) = radius {
        spec.radius = r;
    }
    let mut m = generators::generate_gaussian_mixture(&spec).map_err(err)?;
    if drop_isolated {
        generators::drop_isolated(&mut m).map_err(err)?;
    }
    let pos = m.positions.iter().map(|p| (p[0], p[1])).collect();
    Ok((PyGraph { inner: m.graph }, m.truth, pos))
}

/// Static block model with consecutive blocks. Returns `(graph, truth)`.
#[pyfunction]
#[pyo3(signature = (sizes, p_in, p_out, seed=0))]
fn generate_sbm(sizes: Vec<usize>, p_in: f64, p_out: f64, seed: u64) -> PyResult<(PyGraph, Vec<usize>)> {
    let (g, truth) = generators::generate_sbm(&sizes, p_in, p_out, seed).map_err(err)?;
    Ok((PyGraph { inner: g }, truth))
}

/// `per_class` highest-degree nodes of each class as `(node_id, class)`.
#[pyfunction]
fn pick_labeled(graph: &PyGraph, truth: Vec<usize>, per_class: usize) -> PyResult<Vec<(usize, usize)>> {
    let labels = generators::pick_labeled_nodes(&graph.inner, &truth, per_class).map_err(err)?;
    Ok(label_pairs(&labels))
}

/// Dynamic block model with one constant-step sampling update per time unit.
#[pyfunction]
#[pyo3(signature = (steps, seed=0, cap=1000, init=500, arrival_rate=5e-5, departure_rate=1e-7,
                    density="mcd", classes=3, labeled_per_class=2, permanent_labels=false,
                    eta=1e-3, sigma=0.5, mu=1.0, epsilon=0.1))]
#[allow(clippy::too_many_arguments)]
fn simulate_dsbm<'py>(
    py: Python<'py>,
    steps: u64,
    seed: u64,
    cap: usize,
    init: usize,
    arrival_rate: f64,
    departure_rate: f64,
    density: &str,
    classes: usize,
    labeled_per_class: usize,
    permanent_labels: bool,
    eta: f64,
    sigma: f64,
    mu: f64,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    if classes == 0 {
        return Err(PyValueError::new_err("classes must be at least 1"));
    }
    let density: Density = density.parse().map_err(err)?;
    let spec = DynamicSbmSpec {
        class_probs: vec![1.0 / classes as f64; classes],
        arrival_rate,
        departure_rate,
        cap,
        initial_size: init,
        labeled_per_class,
        permanent_labels,
        ..DynamicSbmSpec::with_defaults(seed)
    }
    .with_density(density);
    let config = SolverConfig {
        sigma,
        mu,
        epsilon,
        schedule: StepSchedule::Constant(eta),
        seed,
        ..SolverConfig::default()
    };
    let out = py
        .detach(|| generators::simulate_dynamic_sbm(&spec, &config, steps))
        .map_err(err)?;
    let d = PyDict::new(py);
    let traj: Vec<_> = out
        .trajectory
        .rows
        .iter()
        .map(|r| (r.iteration, r.error_count, r.error_pct, r.n_nodes))
        .collect();
    d.set_item("trajectory", traj)?;
    d.set_item("events", out.events.iter().map(|e| e.to_string()).collect::<Vec<_>>())?;
    d.set_item("size_changes", out.size_changes.clone())?;
    if steps >= 2 {
        d.set_item("second_half_mean_size", out.time_average_size(steps / 2, steps))?;
    }
    Ok(d)
}

#[pymodule]
fn pygssl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(les_miserables, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(solve_power, m)?)?;
    m.add_function(wrap_pyfunction!(solve_sampling, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(error_rate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(generate_sbm, m)?)?;
    m.add_function(wrap_pyfunction!(pick_labeled, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_dsbm, m)?)?;
    Ok(())
}

//! New-node tracking on a Gaussian-mixture graph: pretrain the sampling
//! solver, insert one node drawn from the mixture, then continue with the
//! focus-cycle policy around it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{generate_gaussian_mixture, insert_geometric_node, pick_labeled_nodes, GaussianMixtureGraph, GaussianMixtureSpec};
use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, NodeId};
use crate::metrics::{classify, error_against, ErrorSummary};
use crate::sampling::{run_sampling_from, track_new_node, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSpec {
    pub mixture: GaussianMixtureSpec,
    pub labeled_per_class: usize,
    /// Iterations (of `N` steps each) before the insertion.
    pub pretrain: usize,
    /// Iterations after the insertion.
    pub post: usize,
    /// Draws of the new node's position before giving up on finding one
    /// with at least one neighbour.
    pub max_insert_attempts: usize,
}

impl TrackingSpec {
    pub fn with_defaults(n: usize, seed: u64) -> Self {
        Self {
            mixture: GaussianMixtureSpec::with_defaults(n, seed),
            labeled_per_class: 2,
            pretrain: 200,
            post: 20,
            max_insert_attempts: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingOutcome {
    pub node: NodeId,
    pub position: [f64; 2],
    pub planted: usize,
    pub predicted: usize,
    pub neighbors: usize,
    /// Nodes dropped from the generated graph for having no neighbours.
    pub dropped_isolated: usize,
    /// Error over unlabelled nodes at the end of pretraining.
    pub pretrain_error: ErrorSummary,
    /// Classes with `F = 0` on every node within two hops of the new node at
    /// insertion time; the focus updates cannot reach them.
    pub unsupported_classes: Vec<usize>,
    /// Row of the new node after each post-insertion iteration.
    pub history: Vec<Vec<f64>>,
}

impl TrackingOutcome {
    pub fn recovered(&self) -> bool {
        self.planted == self.predicted
    }

    /// Whether every unsupported class stayed exactly zero in the new row.
    pub fn unsupported_stay_zero(&self) -> bool {
        self.history
            .iter()
            .all(|row| self.unsupported_classes.iter().all(|&k| row[k] == 0.0))
    }
}

/// Removes zero-degree nodes together with their rows; returns how many.
pub fn drop_isolated(mixture: &mut GaussianMixtureGraph) -> Result<usize> {
    let isolated = mixture.graph.isolated_nodes();
    for &id in &isolated {
        let row = mixture.graph.remove_node(id)?;
        mixture.truth.remove(row);
        mixture.positions.remove(row);
    }
    Ok(isolated.len())
}

fn two_hop_rows(mixture: &GaussianMixtureGraph, v: NodeId) -> Result<Vec<usize>> {
    let g = &mixture.graph;
    let mut rows = vec![g.row_of(v).ok_or(Error::UnknownNode(v))?];
    for &(u, _) in g.neighbors(v)? {
        rows.push(g.row_of(u).expect("live"));
        for &(x, _) in g.neighbors(u)? {
            rows.push(g.row_of(x).expect("live"));
        }
    }
    rows.sort_unstable();
    rows.dedup();
    Ok(rows)
}

/// Runs the protocol. One iteration is `N` solver steps, `N` the size of the
/// graph at the time; the schedule continues from where pretraining ended.
pub fn tracking_experiment(spec: &TrackingSpec, config: &SolverConfig) -> Result<TrackingOutcome> {
    let mut mixture = generate_gaussian_mixture(&spec.mixture)?;
    let dropped_isolated = drop_isolated(&mut mixture)?;
    let labels = pick_labeled_nodes(&mixture.graph, &mixture.truth, spec.labeled_per_class)?;
    let n = mixture.graph.node_count();
    let mut f = labels.indicator(&mixture.graph)?;
    run_sampling_from(&mixture.graph, &labels, config, spec.pretrain, None, &mut f, 0, |_, _| {})?;
    let pretrain_error = error_against(&classify(&f), &mixture.truth, &labels.mask(&mixture.graph))?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.mixture.seed);
    rng.set_stream(1);
    let (planted, position) = (0..spec.max_insert_attempts)
        .map(|_| spec.mixture.sample_point(&mut rng))
        .find(|p| match p {
            Ok((_, pos)) => mixture
                .positions
                .iter()
                .any(|q| (pos[0] - q[0]).powi(2) + (pos[1] - q[1]).powi(2) <= spec.mixture.radius.powi(2)),
            Err(_) => true,
        })
        .ok_or_else(|| Error::invalid("no insertion point with a neighbour was found"))??;
    let v = insert_geometric_node(&mut mixture, planted, position, spec.mixture.radius)?;
    // The new row starts at zero.
    let mut grown = FeatureMatrix::zeros(n + 1, f.cols());
    for r in 0..n {
        grown.row_mut(r).copy_from_slice(f.row(r));
    }
    let mut f = grown;

    let near = two_hop_rows(&mixture, v)?;
    let unsupported_classes: Vec<usize> = (0..f.cols())
        .filter(|&k| near.iter().all(|&r| f.get(r, k) == 0.0))
        .collect();

    let row = mixture.graph.row_of(v).expect("inserted");
    let n1 = mixture.graph.node_count() as u64;
    let mut step = (spec.pretrain * n) as u64;
    let mut history = Vec::with_capacity(spec.post);
    let mut predicted = crate::metrics::argmax(f.row(row));
    for it in 0..spec.post {
        let cfg = SolverConfig {
            seed: config.seed.wrapping_add(1 + it as u64),
            ..config.clone()
        };
        predicted = track_new_node(&mut f, &mixture.graph, &labels, v, &cfg, n1, step)?;
        step += n1;
        history.push(f.row(row).to_vec());
    }
    Ok(TrackingOutcome {
        node: v,
        position,
        planted,
        predicted,
        neighbors: mixture.graph.neighbors(v)?.len(),
        dropped_isolated,
        pretrain_error,
        unsupported_classes,
        history,
    })
}

#![allow(dead_code)]

use gssl::{FeatureMatrix, LabelAssignment, NodeId, SimilarityGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SIGMAS: [f64; 3] = [0.0, 0.5, 1.0];
pub const MUS: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: SimilarityGraph,
    pub labels: LabelAssignment,
    pub y: FeatureMatrix,
    pub sigma: f64,
    pub mu: f64,
}

/// Random spanning tree plus extra edges, weights in [0.5, 2).
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize) -> SimilarityGraph {
    let mut g = SimilarityGraph::with_nodes(n);
    for i in 1..n {
        let j = rng.random_range(0..i);
        g.add_edge(NodeId(i), NodeId(j), rng.random_range(0.5..2.0)).unwrap();
    }
    let p = 3.0 / n as f64;
    for i in 0..n {
        for j in i + 1..n {
            if g.weight(NodeId(i), NodeId(j)).is_none() && rng.random_bool(p) {
                g.add_edge(NodeId(i), NodeId(j), rng.random_range(0.5..2.0)).unwrap();
            }
        }
    }
    g
}

/// One labelled node per class plus a few extra labels.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> LabelAssignment {
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    let extra = rng.random_range(0..=(n - k).min(3));
    let mut labels = LabelAssignment::new(k);
    for (idx, &r) in rows.iter().take(k + extra).enumerate() {
        let class = if idx < k { idx } else { rng.random_range(0..k) };
        labels.assign(NodeId(r), class).unwrap();
    }
    labels
}

pub fn random_instance(seed: u64, n_range: (usize, usize), k_max: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(n_range.0..=n_range.1);
    let k = rng.random_range(1..=k_max.min(n));
    let graph = random_connected_graph(&mut rng, n);
    let labels = random_labels(&mut rng, n, k);
    let y = labels.indicator(&graph).unwrap();
    Instance {
        sigma: SIGMAS[rng.random_range(0..3)],
        mu: MUS[rng.random_range(0..3)],
        graph,
        labels,
        y,
    }
}

pub fn random_features(rng: &mut ChaCha8Rng, n: usize, k: usize) -> FeatureMatrix {
    let data = (0..n * k).map(|_| rng.random_range(-1.0..1.0)).collect();
    FeatureMatrix::from_vec(n, k, data).unwrap()
}

//! Bundled Les Misérables co-appearance graph (77 characters, 254 edges) with
//! six labelled characters and a six-way ground truth. See
//! `data/lesmis/README.md` for provenance.

use std::path::Path;

use crate::graph::{LabelAssignment, NodeId, SimilarityGraph};
use crate::io::{labels_from_pairs, parse_class_file, parse_edge_list, truth_for_graph};

const EDGES: &str = include_str!("../data/lesmis/lesmis.edges");
const EDGES_WEIGHTED: &str = include_str!("../data/lesmis/lesmis_weighted.edges");
const NAMES: &str = include_str!("../data/lesmis/lesmis.names");
const CLASSES: &str = include_str!("../data/lesmis/lesmis.classes");
const LABELS: &str = include_str!("../data/lesmis/lesmis.labels");
const TRUTH: &str = include_str!("../data/lesmis/lesmis.truth");

#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: SimilarityGraph,
    pub labels: LabelAssignment,
    /// Row-aligned ground-truth classes.
    pub truth: Vec<usize>,
    pub node_names: Vec<String>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.node_names
            .iter()
            .position(|n| n == name)
            .map(|r| self.graph.id_at(r))
    }

    pub fn class(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|n| n == name)
    }
}

fn names(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_once(' ').map(|(_, n)| n.trim().to_string()).unwrap_or_default())
        .collect()
}

fn load(edges: &str) -> Dataset {
    let src = Path::new("lesmis");
    let graph = parse_edge_list(edges, src, false).expect("bundled edge list");
    let class_names = names(CLASSES);
    let labels = labels_from_pairs(
        &parse_class_file(LABELS, src).expect("bundled labels"),
        Some(class_names.len()),
    )
    .expect("bundled labels in range");
    let truth = truth_for_graph(&graph, &parse_class_file(TRUTH, src).expect("bundled truth"))
        .expect("bundled truth covers graph");
    Dataset {
        graph,
        labels,
        truth,
        node_names: names(NAMES),
        class_names,
    }
}

/// Unit edge weights, as used in the classification experiments.
pub fn les_miserables() -> Dataset {
    load(EDGES)
}

/// Edge weight = number of co-appearances.
pub fn les_miserables_weighted() -> Dataset {
    load(EDGES_WEIGHTED)
}

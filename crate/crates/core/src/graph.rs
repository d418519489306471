//! Similarity graph storage, labelled-node bookkeeping and the dense feature
//! matrix `F`.
//!
//! Node ids are handed out monotonically and never reused. Rows are kept in
//! ascending id order, so the row of a node only shifts when a lower id is
//! removed.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Undirected weighted graph without self-loops or parallel edges.
#[derive(Debug, Clone, Default)]
pub struct SimilarityGraph {
    ids: Vec<NodeId>,
    adj: Vec<Vec<(NodeId, f64)>>,
    degree: Vec<f64>,
    index: HashMap<NodeId, usize>,
    next_id: usize,
    cap: Option<usize>,
}

impl SimilarityGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph that refuses `add_node` once it holds `cap` nodes.
    pub fn with_cap(cap: usize) -> Self {
        Self {
            cap: Some(cap),
            ..Self::default()
        }
    }

    /// Graph with nodes `0..n` and no edges.
    pub fn with_nodes(n: usize) -> Self {
        let mut g = Self::new();
        for _ in 0..n {
            g.add_node().expect("uncapped graph");
        }
        g
    }

    pub fn cap(&self) -> Option<usize> {
        self.cap
    }

    pub fn add_node(&mut self) -> Result<NodeId> {
        if let Some(cap) = self.cap {
            if self.ids.len() >= cap {
                return Err(Error::CapacityExceeded { cap });
            }
        }
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.index.insert(id, self.ids.len());
        self.ids.push(id);
        self.adj.push(Vec::new());
        self.degree.push(0.0);
        Ok(id)
    }

    /// Removes `id` and its incident edges. Returns the row the node occupied.
    pub fn remove_node(&mut self, id: NodeId) -> Result<usize> {
        let row = self.row_of(id).ok_or(Error::UnknownNode(id))?;
        let incident = std::mem::take(&mut self.adj[row]);
        for (nb, _) in incident {
            let r = self.index[&nb];
            let list = &mut self.adj[r];
            if let Ok(pos) = list.binary_search_by_key(&id, |e| e.0) {
                list.remove(pos);
            }
            // Recompute rather than subtract so the degree stays an exact sum.
            self.degree[r] = list.iter().map(|e| e.1).sum();
        }
        self.ids.remove(row);
        self.adj.remove(row);
        self.degree.remove(row);
        self.index.remove(&id);
        for (r, nid) in self.ids.iter().enumerate().skip(row) {
            self.index.insert(*nid, r);
        }
        Ok(row)
    }

    pub fn add_edge(&mut self, i: NodeId, j: NodeId, w: f64) -> Result<()> {
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::NonPositiveWeight(w));
        }
        let ri = self.row_of(i).ok_or(Error::UnknownNode(i))?;
        let rj = self.row_of(j).ok_or(Error::UnknownNode(j))?;
        let pos_i = match self.adj[ri].binary_search_by_key(&j, |e| e.0) {
            Ok(_) => return Err(Error::DuplicateEdge(i, j)),
            Err(p) => p,
        };
        let pos_j = self.adj[rj]
            .binary_search_by_key(&i, |e| e.0)
            .expect_err("adjacency symmetric");
        self.adj[ri].insert(pos_i, (j, w));
        self.adj[rj].insert(pos_j, (i, w));
        self.degree[ri] += w;
        self.degree[rj] += w;
        Ok(())
    }

    pub fn degree(&self, id: NodeId) -> Result<f64> {
        self.row_of(id)
            .map(|r| self.degree[r])
            .ok_or(Error::UnknownNode(id))
    }

    /// Neighbours of `id` with edge weights, sorted by neighbour id.
    pub fn neighbors(&self, id: NodeId) -> Result<&[(NodeId, f64)]> {
        self.row_of(id)
            .map(|r| self.adj[r].as_slice())
            .ok_or(Error::UnknownNode(id))
    }

    pub fn weight(&self, i: NodeId, j: NodeId) -> Option<f64> {
        let r = self.row_of(i)?;
        self.adj[r]
            .binary_search_by_key(&j, |e| e.0)
            .ok()
            .map(|p| self.adj[r][p].1)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn row_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn id_at(&self, row: usize) -> NodeId {
        self.ids[row]
    }

    /// Live node ids in row order.
    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub(crate) fn row_adjacency(&self, row: usize) -> &[(NodeId, f64)] {
        &self.adj[row]
    }

    pub(crate) fn row_degree(&self, row: usize) -> f64 {
        self.degree[row]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    /// Each undirected edge once, as `(low, high, weight)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.ids.iter().zip(&self.adj).flat_map(|(&u, list)| {
            list.iter()
                .filter(move |(v, _)| u < *v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn isolated_nodes(&self) -> Vec<NodeId> {
        self.ids
            .iter()
            .zip(&self.degree)
            .filter(|(_, &d)| d <= 0.0)
            .map(|(&id, _)| id)
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(r) = queue.pop_front() {
            for (nb, _) in &self.adj[r] {
                let c = self.index[nb];
                if !seen[c] {
                    seen[c] = true;
                    count += 1;
                    queue.push_back(c);
                }
            }
        }
        count == n
    }

    /// Checks symmetry, absence of self-loops and that every stored degree
    /// matches a fresh sum of incident weights within `1e-12`.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (r, &u) in self.ids.iter().enumerate() {
            let mut sum = 0.0;
            for &(v, w) in &self.adj[r] {
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                match self.weight(v, u) {
                    Some(back) if back == w => {}
                    other => return Err(format!("asymmetric edge {u}-{v}: {w} vs {other:?}")),
                }
                sum += w;
            }
            if (sum - self.degree[r]).abs() > 1e-12 {
                return Err(format!("degree of {u}: stored {} vs {sum}", self.degree[r]));
            }
        }
        Ok(())
    }
}

/// Map from labelled node to its class index in `0..num_classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAssignment {
    num_classes: usize,
    labels: BTreeMap<NodeId, usize>,
}

impl LabelAssignment {
    pub fn new(num_classes: usize) -> Self {
        Self {
            num_classes,
            labels: BTreeMap::new(),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Labels `id` with `class`, replacing any earlier label.
    pub fn assign(&mut self, id: NodeId, class: usize) -> Result<()> {
        if class >= self.num_classes {
            return Err(Error::ClassOutOfRange {
                class,
                num_classes: self.num_classes,
            });
        }
        self.labels.insert(id, class);
        Ok(())
    }

    pub fn remove(&mut self, id: NodeId) -> Option<usize> {
        self.labels.remove(&id)
    }

    pub fn class_of(&self, id: NodeId) -> Option<usize> {
        self.labels.get(&id).copied()
    }

    pub fn is_labeled(&self, id: NodeId) -> bool {
        self.labels.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.labels.iter().map(|(&id, &c)| (id, c))
    }

    pub fn count_in_class(&self, class: usize) -> usize {
        self.labels.values().filter(|&&c| c == class).count()
    }

    /// The `N x K` indicator matrix `Y`, rows aligned with `graph`.
    pub fn indicator(&self, graph: &SimilarityGraph) -> Result<FeatureMatrix> {
        let mut y = FeatureMatrix::zeros(graph.node_count(), self.num_classes);
        for (&id, &class) in &self.labels {
            let row = graph.row_of(id).ok_or(Error::UnknownNode(id))?;
            y.set(row, class, 1.0);
        }
        Ok(y)
    }

    /// Row-aligned flags marking labelled nodes.
    pub fn mask(&self, graph: &SimilarityGraph) -> Vec<bool> {
        graph.ids().iter().map(|id| self.is_labeled(*id)).collect()
    }
}

/// Dense row-major `N x K` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dims("ragged rows"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn push_zero_row(&mut self) {
        self.data.extend(std::iter::repeat_n(0.0, self.cols));
        self.rows += 1;
    }

    pub fn remove_row(&mut self, r: usize) {
        self.data.drain(r * self.cols..(r + 1) * self.cols);
        self.rows -= 1;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `max |self - other|` over all entries.
    pub fn max_abs_diff(&self, other: &FeatureMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub(crate) fn check_shape(&self, rows: usize, cols: usize, what: &str) -> Result<()> {
        if self.shape() != (rows, cols) {
            return Err(Error::dims(format!(
                "{what} is {}x{}, expected {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

/// Graph, labels and features kept row-aligned across node churn.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub graph: SimilarityGraph,
    pub labels: LabelAssignment,
    pub features: FeatureMatrix,
}

impl LabeledGraph {
    pub fn new(graph: SimilarityGraph, labels: LabelAssignment) -> Result<Self> {
        let features = labels.indicator(&graph)?;
        Ok(Self {
            graph,
            labels,
            features,
        })
    }

    /// Adds a node with an all-zero feature row.
    pub fn add_node(&mut self) -> Result<NodeId> {
        let id = self.graph.add_node()?;
        self.features.push_zero_row();
        Ok(id)
    }

    /// Removes the node, its feature row and its label, returning the label.
    pub fn remove_node(&mut self, id: NodeId) -> Result<Option<usize>> {
        let row = self.graph.remove_node(id)?;
        self.features.remove_row(row);
        Ok(self.labels.remove(id))
    }
}

//! Diffusion operator `B = D^-σ A D^(σ-1)`, its row sums `H`, the random-walk
//! kernels `P = H^-1 B` and `Q = (1-ε)P + ε/N`, and the dense verification
//! path (closed-form solve, objective).

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, SimilarityGraph};

/// Largest graph accepted by [`closed_form_solve`] by default.
pub const DENSE_LIMIT: usize = 2000;

/// Default teleport probability of the sampling chain.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// `α = 2 / (2 + μ)`.
pub fn alpha_from_mu(mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    Ok(2.0 / (2.0 + mu))
}

/// Sparse `B` over a graph snapshot. Column indices are snapshot rows.
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    sigma: f64,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    row_sums: Vec<f64>,
    degrees: Vec<f64>,
}

impl DiffusionOperator {
    /// Builds `B` for `graph`. Fails if any node has zero degree.
    pub fn build(graph: &SimilarityGraph, sigma: f64) -> Result<Self> {
        let isolated = graph.isolated_nodes();
        if !isolated.is_empty() {
            return Err(Error::ZeroDegree(isolated));
        }
        Self::build_allow_isolated(graph, sigma)
    }

    /// Like [`build`](Self::build) but isolated nodes get an empty row and
    /// `H_ii = 0`. Used by the dynamic simulator where churn can strand a node.
    pub fn build_allow_isolated(graph: &SimilarityGraph, sigma: f64) -> Result<Self> {
        if !sigma.is_finite() {
            return Err(Error::invalid(format!("sigma must be finite, got {sigma}")));
        }
        let n = graph.node_count();
        let degrees = graph.degrees().to_vec();
        let out_scale: Vec<f64> = degrees
            .iter()
            .map(|&d| if d > 0.0 { d.powf(sigma - 1.0) } else { 0.0 })
            .collect();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz = graph.edge_count() * 2;
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        let mut row_sums = Vec::with_capacity(n);
        for (row, &d) in degrees.iter().enumerate() {
            let in_scale = if d > 0.0 { d.powf(-sigma) } else { 0.0 };
            let mut h = 0.0;
            for &(nb, w) in graph.row_adjacency(row) {
                let c = graph.row_of(nb).expect("neighbour is live");
                let b = in_scale * w * out_scale[c];
                cols.push(c);
                vals.push(b);
                h += b;
            }
            row_sums.push(h);
            row_ptr.push(cols.len());
        }
        Ok(Self {
            sigma,
            row_ptr,
            cols,
            vals,
            row_sums,
            degrees,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.row_sums.len()
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[s..e], &self.vals[s..e])
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    /// `H_ii`.
    #[inline]
    pub fn row_sum(&self, i: usize) -> f64 {
        self.row_sums[i]
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `out = (B x)_i` for one row; accumulation order is fixed by storage.
    #[inline]
    pub fn row_apply(&self, i: usize, x: &FeatureMatrix, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let (cols, vals) = self.row(i);
        for (&c, &b) in cols.iter().zip(vals) {
            for (o, xv) in out.iter_mut().zip(x.row(c)) {
                *o += b * xv;
            }
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&c, &b)| b * x[c]).sum()
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &c in self.row(i).0 {
                if !seen[c] {
                    seen[c] = true;
                    count += 1;
                    queue.push_back(c);
                }
            }
        }
        count == n
    }

    /// The positive eigenvector `w_i = d(i)^(1-σ)` with `Bw = w`.
    pub fn perron_weights(&self) -> PerronWeights {
        PerronWeights {
            weights: self
                .degrees
                .iter()
                .map(|&d| d.powf(1.0 - self.sigma))
                .collect(),
            connected: self.is_connected(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let (cols, vals) = self.row(i);
            for (&c, &b) in cols.iter().zip(vals) {
                m[(i, c)] = b;
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct PerronWeights {
    pub weights: Vec<f64>,
    /// On a disconnected graph `w` is still an eigenvector for eigenvalue 1,
    /// but no longer the unique one.
    pub connected: bool,
}

/// Perron weights of `B` built from `graph` at `sigma`.
pub fn perron_weights(graph: &SimilarityGraph, sigma: f64) -> Result<PerronWeights> {
    Ok(DiffusionOperator::build(graph, sigma)?.perron_weights())
}

/// `‖Bw − w‖_∞ / ‖w‖_∞`.
pub fn perron_residual(op: &DiffusionOperator, w: &[f64]) -> f64 {
    let bw = op.apply_vec(w);
    let num = bw.iter().zip(w).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let den = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    num / den
}

/// `max_i |x_i| / w_i`.
pub fn weighted_norm(x: &[f64], w: &[f64]) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::dims(format!(
            "vector has {} entries, weights {}",
            x.len(),
            w.len()
        )));
    }
    Ok(x.iter().zip(w).fold(0.0, |m, (a, b)| m.max(a.abs() / b)))
}

/// Column-wise weighted norm, maximised over columns.
pub fn weighted_norm_matrix(x: &FeatureMatrix, w: &[f64]) -> Result<f64> {
    if x.rows() != w.len() {
        return Err(Error::dims(format!(
            "matrix has {} rows, weights {}",
            x.rows(),
            w.len()
        )));
    }
    let mut m = 0.0f64;
    for (r, &wr) in w.iter().enumerate() {
        for v in x.row(r) {
            m = m.max(v.abs() / wr);
        }
    }
    Ok(m)
}

/// Row-stochastic `P` plus teleport mixing; `Q` is never materialised.
#[derive(Debug, Clone)]
pub struct WalkKernel {
    epsilon: f64,
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    p: Vec<f64>,
    cumulative: Vec<f64>,
}

impl WalkKernel {
    pub fn new(op: &DiffusionOperator, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::invalid(format!("epsilon must be in [0,1], got {epsilon}")));
        }
        let n = op.n();
        let mut p = Vec::with_capacity(op.nnz());
        let mut cumulative = Vec::with_capacity(op.nnz());
        for i in 0..n {
            let h = op.row_sum(i);
            let mut acc = 0.0;
            for &b in op.row(i).1 {
                let pij = b / h;
                acc += pij;
                p.push(pij);
                cumulative.push(acc);
            }
        }
        Ok(Self {
            epsilon,
            n,
            row_ptr: op.row_ptr.clone(),
            cols: op.cols.clone(),
            p,
            cumulative,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn span(&self, i: usize) -> (usize, usize) {
        (self.row_ptr[i], self.row_ptr[i + 1])
    }

    /// Neighbour rows and `p(i, ·)` of row `i`.
    pub fn p_row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = self.span(i);
        (&self.cols[s..e], &self.p[s..e])
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        let (cols, p) = self.p_row(i);
        cols.binary_search(&j).map_or(0.0, |k| p[k])
    }

    /// `q(i,j) = (1-ε) p(i,j) + ε/N`. An isolated row teleports uniformly.
    pub fn q(&self, i: usize, j: usize) -> f64 {
        let (s, e) = self.span(i);
        if s == e {
            return 1.0 / self.n as f64;
        }
        (1.0 - self.epsilon) * self.p(i, j) + self.epsilon / self.n as f64
    }

    /// Likelihood ratio `p(i,j) / q(i,j)`; zero off the neighbourhood.
    pub fn likelihood_ratio(&self, i: usize, j: usize) -> f64 {
        let p = self.p(i, j);
        if p == 0.0 {
            return 0.0;
        }
        p / ((1.0 - self.epsilon) * p + self.epsilon / self.n as f64)
    }

    /// Draws `j ~ Q(i, ·)` and returns it with its likelihood ratio.
    pub fn sample<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> (usize, f64) {
        let (s, e) = self.span(i);
        if s == e || rng.random::<f64>() < self.epsilon {
            let j = rng.random_range(0..self.n);
            return (j, self.likelihood_ratio(i, j));
        }
        let cum = &self.cumulative[s..e];
        let u = rng.random::<f64>() * cum[cum.len() - 1];
        let k = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        let p = self.p[s + k];
        let ratio = p / ((1.0 - self.epsilon) * p + self.epsilon / self.n as f64);
        (self.cols[s + k], ratio)
    }
}

/// `Q(F) = 2 Σ_k F_k' D^(σ-1) L D^(σ-1) F_k + μ Σ_k (F_k - Y_k)' D^(2σ-1) (F_k - Y_k)`.
///
/// The smoothness term is evaluated edge by edge as
/// `Σ_(i,j) A_ij (g_i - g_j)^2` with `g = D^(σ-1) F`, so it is never negative.
pub fn objective(
    f: &FeatureMatrix,
    y: &FeatureMatrix,
    graph: &SimilarityGraph,
    sigma: f64,
    mu: f64,
) -> Result<f64> {
    let n = graph.node_count();
    f.check_shape(n, y.cols(), "F")?;
    y.check_shape(n, f.cols(), "Y")?;
    let isolated = graph.isolated_nodes();
    if !isolated.is_empty() {
        return Err(Error::ZeroDegree(isolated));
    }
    let d = graph.degrees();
    let scale: Vec<f64> = d.iter().map(|&v| v.powf(sigma - 1.0)).collect();
    let mut smooth = 0.0;
    for (u, v, w) in graph.edges() {
        let (ru, rv) = (graph.row_of(u).unwrap(), graph.row_of(v).unwrap());
        for k in 0..f.cols() {
            let diff = scale[ru] * f.get(ru, k) - scale[rv] * f.get(rv, k);
            smooth += w * diff * diff;
        }
    }
    let mut fit = 0.0;
    for (r, &dv) in d.iter().enumerate().take(n) {
        let dr = dv.powf(2.0 * sigma - 1.0);
        for k in 0..f.cols() {
            let e = f.get(r, k) - y.get(r, k);
            fit += dr * e * e;
        }
    }
    Ok(2.0 * smooth + mu * fit)
}

/// Dense solve of `F = (1-α)(I - αB)^-1 Y`, for verification on small graphs.
pub fn closed_form_solve(
    op: &DiffusionOperator,
    y: &FeatureMatrix,
    alpha: f64,
    limit: usize,
) -> Result<FeatureMatrix> {
    let n = op.n();
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    y.check_shape(n, y.cols(), "Y")?;
    if y.rows() != n {
        return Err(Error::dims(format!("Y has {} rows, operator {n}", y.rows())));
    }
    let m = DMatrix::identity(n, n) - op.to_dense() * alpha;
    let lu = m.lu();
    let mut out = FeatureMatrix::zeros(n, y.cols());
    for k in 0..y.cols() {
        let rhs = DVector::from_vec(y.column(k));
        let sol = lu.solve(&rhs).ok_or(Error::Singular)?;
        for r in 0..n {
            out.set(r, k, (1.0 - alpha) * sol[r]);
        }
    }
    Ok(out)
}

/// `max |F - αBF - (1-α)Y|`.
pub fn fixed_point_residual(
    op: &DiffusionOperator,
    f: &FeatureMatrix,
    y: &FeatureMatrix,
    alpha: f64,
) -> f64 {
    let mut buf = vec![0.0; f.cols()];
    let mut worst = 0.0f64;
    for i in 0..op.n() {
        op.row_apply(i, f, &mut buf);
        for (k, &b) in buf.iter().enumerate() {
            let g = alpha * b + (1.0 - alpha) * y.get(i, k);
            worst = worst.max((f.get(i, k) - g).abs());
        }
    }
    worst
}

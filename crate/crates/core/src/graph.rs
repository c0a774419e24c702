//! Finite undirected weighted graphs in compressed sparse row form.
//!
//! The normalized Laplacian uses the pseudoinverse of the degree matrix, so
//! isolated nodes are allowed: their rows of the normalized adjacency are zero
//! and the Laplacian diagonal entry is 1.

use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graphon::StepGraphon;
use crate::spectral::SymmetricOperator;

/// A real signal on the nodes of a graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Signal(pub Vec<f64>);

impl Signal {
    pub fn zeros(n: usize) -> Self {
        Signal(vec![0.0; n])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Signal {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Signal {
    fn from(v: Vec<f64>) -> Self {
        Signal(v)
    }
}

/// Undirected graph with nonnegative symmetric weights and no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
}

/// Builds a graph from `(u, v, w)` triples.
///
/// Edges are symmetrized and deduplicated (the last occurrence of an
/// undirected pair wins), self-loops and zero weights are dropped.
pub fn build_graph(edges: &[(usize, usize, f64)], n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut keyed: Vec<(usize, usize, usize, f64)> = Vec::with_capacity(edges.len());
    for (pos, &(u, v, w)) in edges.iter().enumerate() {
        if u >= n || v >= n {
            return Err(Error::InvalidEdge { u, v, n });
        }
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidWeight { u, v, w });
        }
        if u == v {
            continue;
        }
        keyed.push((u.min(v), u.max(v), pos, w));
    }
    keyed.sort_unstable_by_key(|&(a, b, pos, _)| (a, b, pos));

    let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(keyed.len());
    for (i, &(a, b, _, w)) in keyed.iter().enumerate() {
        let last_of_group = keyed
            .get(i + 1)
            .is_none_or(|&(a2, b2, _, _)| (a2, b2) != (a, b));
        if last_of_group && w > 0.0 {
            pairs.push((a, b, w));
        }
    }
    Ok(Graph::from_pairs(n, &pairs))
}

impl Graph {
    /// Unweighted convenience constructor.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        build_graph(&weighted, n)
    }

    /// Builds from the strictly-upper-triangular part of a dense symmetric
    /// matrix. The diagonal is ignored.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Graph> {
        let n = a.nrows();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if a.ncols() != n {
            return Err(Error::DimensionError { expected: n, got: a.ncols() });
        }
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                let w = a[(u, v)];
                if (w - a[(v, u)]).abs() > 1e-12 {
                    return Err(Error::NotSymmetric { defect: (w - a[(v, u)]).abs() });
                }
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidWeight { u, v, w });
                }
                if w > 0.0 {
                    pairs.push((u, v, w));
                }
            }
        }
        Ok(Graph::from_pairs(n, &pairs))
    }

    // `pairs` holds each undirected edge once with u < v and w > 0.
    fn from_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Graph {
        let mut counts = vec![0usize; n];
        for &(u, v, _) in pairs {
            counts[u] += 1;
            counts[v] += 1;
        }
        let mut row_ptr = vec![0usize; n + 1];
        for u in 0..n {
            row_ptr[u + 1] = row_ptr[u] + counts[u];
        }
        let nnz = row_ptr[n];
        let mut col_idx = vec![0usize; nnz];
        let mut weights = vec![0.0; nnz];
        let mut fill = row_ptr.clone();
        for &(u, v, w) in pairs {
            col_idx[fill[u]] = v;
            weights[fill[u]] = w;
            fill[u] += 1;
            col_idx[fill[v]] = u;
            weights[fill[v]] = w;
            fill[v] += 1;
        }
        for u in 0..n {
            let (lo, hi) = (row_ptr[u], row_ptr[u + 1]);
            let mut row: Vec<(usize, f64)> = col_idx[lo..hi]
                .iter()
                .copied()
                .zip(weights[lo..hi].iter().copied())
                .collect();
            row.sort_unstable_by_key(|&(v, _)| v);
            for (k, (v, w)) in row.into_iter().enumerate() {
                col_idx[lo + k] = v;
                weights[lo + k] = w;
            }
        }
        let degrees = (0..n)
            .map(|u| weights[row_ptr[u]..row_ptr[u + 1]].iter().sum())
            .collect();
        Graph { n, row_ptr, col_idx, weights, degrees }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn degree(&self, u: usize) -> f64 {
        self.degrees[u]
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.col_idx.len() / 2
    }

    /// Σ_uv A[u][v], counting each undirected edge twice.
    pub fn total_weight(&self) -> f64 {
        self.degrees.iter().sum()
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[u], self.row_ptr[u + 1]);
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.weights[lo..hi].iter().copied())
    }

    pub fn neighbor_ids(&self, u: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    pub fn neighbor_weights(&self, u: usize) -> &[f64] {
        &self.weights[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        let cols = self.neighbor_ids(u);
        match cols.binary_search(&v) {
            Ok(k) => self.weights[self.row_ptr[u] + k],
            Err(_) => 0.0,
        }
    }

    /// Iterates each undirected edge once as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| v > u)
                .map(move |(v, w)| (u, v, w))
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for u in 0..self.n {
            for (v, w) in self.neighbors(u) {
                a[(u, v)] = w;
            }
        }
        a
    }

    /// Subgraph induced by `nodes`; local index `i` corresponds to `nodes[i]`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Graph> {
        if nodes.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut local = vec![usize::MAX; self.n];
        for (i, &u) in nodes.iter().enumerate() {
            if u >= self.n {
                return Err(Error::InvalidEdge { u, v: u, n: self.n });
            }
            local[u] = i;
        }
        let mut pairs = Vec::new();
        for (i, &u) in nodes.iter().enumerate() {
            for (v, w) in self.neighbors(u) {
                let j = local[v];
                if j != usize::MAX && i < j {
                    pairs.push((i, j, w));
                }
            }
        }
        Ok(Graph::from_pairs(nodes.len(), &pairs))
    }

    /// Relabels nodes so that new node `i` is old node `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Graph> {
        if order.len() != self.n {
            return Err(Error::DimensionError { expected: self.n, got: order.len() });
        }
        let mut seen = vec![false; self.n];
        for &u in order {
            if u >= self.n || std::mem::replace(&mut seen[u], true) {
                return Err(Error::InvalidParams("order is not a permutation".into()));
            }
        }
        self.induced_subgraph(order)
    }

    /// Node order by ascending degree, ties by index.
    pub fn degree_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| self.degrees[a].total_cmp(&self.degrees[b]).then(a.cmp(&b)));
        order
    }

    /// Connected component label for every node, numbered by first appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in self.neighbor_ids(u) {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

fn inv_sqrt(d: f64) -> f64 {
    if d > 0.0 {
        1.0 / d.sqrt()
    } else {
        0.0
    }
}

/// Sparse normalized Laplacian `I - (D^+)^{1/2} A (D^+)^{1/2}`.
#[derive(Debug, Clone)]
pub struct NormalizedLaplacian {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    abar: Vec<f64>,
}

pub fn normalized_laplacian(g: &Graph) -> NormalizedLaplacian {
    let scale: Vec<f64> = g.degrees.iter().map(|&d| inv_sqrt(d)).collect();
    let mut abar = Vec::with_capacity(g.weights.len());
    for u in 0..g.n {
        for (v, w) in g.neighbors(u) {
            abar.push(scale[u] * w * scale[v]);
        }
    }
    NormalizedLaplacian {
        n: g.n,
        row_ptr: g.row_ptr.clone(),
        col_idx: g.col_idx.clone(),
        abar,
    }
}

impl NormalizedLaplacian {
    /// `x^T L x` without materializing `L x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for u in 0..self.n {
            let mut row = 0.0;
            for k in self.row_ptr[u]..self.row_ptr[u + 1] {
                row += self.abar[k] * x[self.col_idx[k]];
            }
            acc += x[u] * (x[u] - row);
        }
        acc
    }
}

impl SymmetricOperator for NormalizedLaplacian {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for u in 0..self.n {
            let mut row = 0.0;
            for k in self.row_ptr[u]..self.row_ptr[u + 1] {
                row += self.abar[k] * x[self.col_idx[k]];
            }
            y[u] = x[u] - row;
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.n, self.n);
        for u in 0..self.n {
            for k in self.row_ptr[u]..self.row_ptr[u + 1] {
                m[(u, self.col_idx[k])] -= self.abar[k];
            }
        }
        m
    }

    fn symmetry_defect(&self) -> f64 {
        // Built from a symmetric CSR pattern with a symmetric scaling.
        0.0
    }
}

/// Normalized Laplacian of a dense nonnegative symmetric weight matrix.
///
/// Unlike [`Graph`], the diagonal is kept: coarse graphs and blockmodel
/// matrices carry within-block mass on it.
pub fn normalized_laplacian_dense(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let scale: Vec<f64> = (0..n).map(|u| inv_sqrt(w.row(u).sum())).collect();
    DMatrix::from_fn(n, n, |u, v| {
        let delta = if u == v { 1.0 } else { 0.0 };
        delta - scale[u] * w[(u, v)] * scale[v]
    })
}

/// Total variation `x^T L x`.
pub fn total_variation(g: &Graph, x: &[f64]) -> Result<f64> {
    if x.len() != g.n {
        return Err(Error::DimensionError { expected: g.n, got: x.len() });
    }
    Ok(normalized_laplacian(g).quadratic_form(x))
}

/// The step graphon `W_n` induced by the adjacency matrix on the
/// `n`-equipartition of `[0, 1]`.
pub fn induced_graphon(g: &Graph) -> StepGraphon {
    let n = g.n;
    let boundaries = (0..=n).map(|k| k as f64 / n as f64).collect();
    StepGraphon::new(boundaries, g.to_dense()).expect("adjacency is a valid step kernel")
}

//! Sparse attributed graphs and the degree/feature utilities built on them.

use std::collections::BTreeSet;

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Undirected graph in CSR form with a dense node-attribute matrix.
///
/// Every edge is stored in both directions, rows are sorted, and there are
/// no self-loops or duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    features: Array2<f64>,
}

impl AttributedGraph {
    /// Builds a graph from an edge list. The node count is the number of
    /// feature rows. Duplicate edges and self-loops are dropped.
    pub fn from_edges(edges: &[(usize, usize)], features: Array2<f64>) -> Result<Self> {
        let n = features.nrows();
        let mut adjacency = vec![Vec::new(); n];
        let mut dropped_loops = 0usize;
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Input(format!(
                    "edge ({a}, {b}) references a node outside 0..{n}"
                )));
            }
            if a == b {
                dropped_loops += 1;
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        if dropped_loops > 0 {
            log::debug!("dropped {dropped_loops} self-loops");
        }
        Ok(Self::from_adjacency(adjacency, features))
    }

    /// Builds from per-node neighbor lists that are already symmetric.
    /// Lists are sorted and deduplicated here.
    pub(crate) fn from_adjacency(mut adjacency: Vec<Vec<usize>>, features: Array2<f64>) -> Self {
        debug_assert_eq!(adjacency.len(), features.nrows());
        let mut row_offsets = Vec::with_capacity(adjacency.len() + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        for (v, row) in adjacency.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            row.retain(|&u| u != v);
            col_indices.extend_from_slice(row);
            row_offsets.push(col_indices.len());
        }
        Self {
            row_offsets,
            col_indices,
            features,
        }
    }

    /// Same topology with a different attribute matrix.
    pub fn with_features(&self, features: Array2<f64>) -> Result<Self> {
        if features.nrows() != self.n() {
            return Err(Error::Input(format!(
                "feature matrix has {} rows, graph has {} nodes",
                features.nrows(),
                self.n()
            )));
        }
        Ok(Self {
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            features,
        })
    }

    pub fn n(&self) -> usize {
        self.row_offsets.len() - 1
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[v]..self.row_offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row_offsets[v + 1] - self.row_offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.row_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Undirected edges as `(low, high)` pairs in CSR order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |v| {
            self.neighbors(v)
                .iter()
                .filter(move |&&u| u > v)
                .map(move |&u| (v, u))
        })
    }

    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges().collect()
    }

    pub(crate) fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n()).map(|v| self.neighbors(v).to_vec()).collect()
    }
}

/// Tail/head split of the node set by a degree threshold `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreePartition {
    k_threshold: usize,
    tail: Vec<usize>,
    head: Vec<usize>,
    is_head: Vec<bool>,
}

impl DegreePartition {
    pub fn k_threshold(&self) -> usize {
        self.k_threshold
    }

    /// Nodes with degree at most `K`, ascending.
    pub fn tail_nodes(&self) -> &[usize] {
        &self.tail
    }

    /// Nodes with degree above `K`, ascending.
    pub fn head_nodes(&self) -> &[usize] {
        &self.head
    }

    pub fn is_head(&self, v: usize) -> bool {
        self.is_head[v]
    }

    pub fn is_tail(&self, v: usize) -> bool {
        !self.is_head[v]
    }
}

pub fn partition_by_degree(g: &AttributedGraph, k: usize) -> Result<DegreePartition> {
    if k < 1 {
        return Err(Error::Parameter("degree threshold K must be at least 1".into()));
    }
    let is_head: Vec<bool> = (0..g.n()).map(|v| g.degree(v) > k).collect();
    let (head, tail): (Vec<usize>, Vec<usize>) = (0..g.n()).partition(|&v| is_head[v]);
    Ok(DegreePartition {
        k_threshold: k,
        tail,
        head,
        is_head,
    })
}

/// Scales every row to unit Euclidean norm. All-zero rows stay zero.
pub fn l2_normalize_features(g: &AttributedGraph) -> Array2<f64> {
    l2_normalize_rows(g.features())
}

pub fn l2_normalize_rows(m: &Array2<f64>) -> Array2<f64> {
    let mut out = m.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|x| x / norm);
        }
    }
    out
}

/// `qᵀk / (‖q‖‖k‖)`, or 0 when either vector is zero.
pub fn cosine_similarity(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let (mut dot, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        dot += a * b;
        xx += a * a;
        yy += b * b;
    }
    if xx == 0.0 || yy == 0.0 {
        return 0.0;
    }
    (dot / (xx.sqrt() * yy.sqrt())).clamp(-1.0, 1.0)
}

/// Cosine similarities against pre-normalized attribute rows.
///
/// Keeps both a row-sparse and a column-sparse copy so that one node's
/// similarity to every other node costs only the posting lists of its
/// nonzero attributes. Bag-of-words features make this far cheaper than a
/// dense scan.
#[derive(Debug, Clone)]
pub struct FeatureSimilarity {
    n: usize,
    row_offsets: Vec<usize>,
    row_entries: Vec<(usize, f64)>,
    col_offsets: Vec<usize>,
    col_entries: Vec<(usize, f64)>,
}

impl FeatureSimilarity {
    /// `normalized` must already have unit (or zero) rows.
    pub fn new(normalized: &Array2<f64>) -> Self {
        let (n, f) = normalized.dim();
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let mut row_entries = Vec::new();
        let mut col_counts = vec![0usize; f];
        for row in normalized.axis_iter(Axis(0)) {
            for (k, &x) in row.iter().enumerate() {
                if x != 0.0 {
                    row_entries.push((k, x));
                    col_counts[k] += 1;
                }
            }
            row_offsets.push(row_entries.len());
        }
        let mut col_offsets = Vec::with_capacity(f + 1);
        col_offsets.push(0);
        for c in &col_counts {
            col_offsets.push(col_offsets.last().unwrap() + c);
        }
        let mut cursor = col_offsets[..f].to_vec();
        let mut col_entries = vec![(0usize, 0.0); row_entries.len()];
        for v in 0..n {
            for &(k, x) in &row_entries[row_offsets[v]..row_offsets[v + 1]] {
                col_entries[cursor[k]] = (v, x);
                cursor[k] += 1;
            }
        }
        Self {
            n,
            row_offsets,
            row_entries,
            col_offsets,
            col_entries,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn row(&self, v: usize) -> &[(usize, f64)] {
        &self.row_entries[self.row_offsets[v]..self.row_offsets[v + 1]]
    }

    /// Cosine similarity of nodes `u` and `v`.
    pub fn pair(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (self.row(u), self.row(v));
        let (mut i, mut j, mut dot) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        dot.clamp(-1.0, 1.0)
    }

    /// Writes `sim(v, u)` for every node `u` into `out`.
    pub fn to_all(&self, v: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        out.fill(0.0);
        for &(k, x) in self.row(v) {
            for &(u, y) in &self.col_entries[self.col_offsets[k]..self.col_offsets[k + 1]] {
                out[u] += x * y;
            }
        }
        for s in out.iter_mut() {
            *s = s.clamp(-1.0, 1.0);
        }
    }
}

/// `D̃^{-1/2}(A+I)D̃^{-1/2}` in CSR form, diagonal included.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    weights: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn n(&self) -> usize {
        self.row_offsets.len() - 1
    }

    /// `(column, weight)` pairs of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .binary_search(&j)
            .ok()
            .map(|pos| self.weights[range.start + pos])
    }

    /// Dense product `Â · m`. The matrix is symmetric, so this also serves
    /// as `Âᵀ · m` in backpropagation.
    pub fn matmul(&self, m: &Array2<f64>) -> Array2<f64> {
        assert_eq!(m.nrows(), self.n(), "row count mismatch in sparse product");
        let cols = m.ncols();
        let mut out = Array2::<f64>::zeros((self.n(), cols));
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut out_row)| {
                for (j, w) in self.row(i) {
                    out_row.scaled_add(w, &m.row(j));
                }
            });
        out
    }
}

pub fn normalized_adjacency(g: &AttributedGraph) -> NormalizedAdjacency {
    let n = g.n();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|v| 1.0 / ((g.degree(v) + 1) as f64).sqrt())
        .collect();
    let mut row_offsets = Vec::with_capacity(n + 1);
    row_offsets.push(0);
    let mut col_indices = Vec::with_capacity(g.col_indices().len() + n);
    let mut weights = Vec::with_capacity(g.col_indices().len() + n);
    for i in 0..n {
        let mut diagonal_done = false;
        for &j in g.neighbors(i) {
            if !diagonal_done && j > i {
                col_indices.push(i);
                weights.push(inv_sqrt[i] * inv_sqrt[i]);
                diagonal_done = true;
            }
            col_indices.push(j);
            weights.push(inv_sqrt[i] * inv_sqrt[j]);
        }
        if !diagonal_done {
            col_indices.push(i);
            weights.push(inv_sqrt[i] * inv_sqrt[i]);
        }
        row_offsets.push(col_indices.len());
    }
    NormalizedAdjacency {
        row_offsets,
        col_indices,
        weights,
    }
}

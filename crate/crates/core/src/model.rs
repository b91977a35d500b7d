//! Forward pass of the contrastive network: GCN encoder, mean readout over
//! RWR neighborhoods, and the bilinear discriminator.

use ndarray::{Array1, Array2, ArrayView1, Axis, Zip};
use rand::Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::graph::{normalized_adjacency, AttributedGraph, NormalizedAdjacency};
use crate::rwr::rwr_sample;
use crate::sampling::derive_rng;

/// Node attributes in row-sparse form. Bag-of-words inputs are mostly
/// zeros, so products with the first-layer weight skip them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    f: usize,
    row_offsets: Vec<usize>,
    entries: Vec<(usize, f64)>,
}

impl FeatureMatrix {
    pub fn from_dense(x: &Array2<f64>) -> Self {
        let (n, f) = x.dim();
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let mut entries = Vec::new();
        for row in x.rows() {
            entries.extend(row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(k, &v)| (k, v)));
            row_offsets.push(entries.len());
        }
        FeatureMatrix {
            n,
            f,
            row_offsets,
            entries,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.f
    }

    fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.entries[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    /// `X · W`.
    pub fn matmul(&self, w: &Array2<f64>) -> Array2<f64> {
        assert_eq!(w.nrows(), self.f);
        let mut out = Array2::zeros((self.n, w.ncols()));
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut o)| {
                for &(k, x) in self.row(i) {
                    o.scaled_add(x, &w.row(k));
                }
            });
        out
    }

    /// `Xᵀ · G`.
    pub fn t_matmul(&self, g: &Array2<f64>) -> Array2<f64> {
        assert_eq!(g.nrows(), self.n);
        let mut out = Array2::zeros((self.f, g.ncols()));
        for i in 0..self.n {
            let gi = g.row(i);
            for &(k, x) in self.row(i) {
                out.row_mut(k).scaled_add(x, &gi);
            }
        }
        out
    }
}

/// First and second Adam moments for one weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub first: Array2<f64>,
    pub second: Array2<f64>,
}

impl Moments {
    pub fn zeros_like(w: &Array2<f64>) -> Self {
        Moments {
            first: Array2::zeros(w.raw_dim()),
            second: Array2::zeros(w.raw_dim()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub gcn: Vec<Moments>,
    pub bilinear: Moments,
    pub step: u64,
}

/// Encoder weights (one matrix per GCN layer, the first `f×d`, the rest
/// `d×d`), the `d×d` bilinear form, and optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub gcn: Vec<Array2<f64>>,
    pub bilinear: Array2<f64>,
    pub adam: AdamState,
}

fn xavier_uniform<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-bound..bound))
}

impl ModelParams {
    /// Wraps given weights with zeroed optimizer state.
    pub fn from_weights(gcn: Vec<Array2<f64>>, bilinear: Array2<f64>) -> Self {
        let adam = AdamState {
            gcn: gcn.iter().map(Moments::zeros_like).collect(),
            bilinear: Moments::zeros_like(&bilinear),
            step: 0,
        };
        ModelParams { gcn, bilinear, adam }
    }

    pub fn input_dim(&self) -> usize {
        self.gcn[0].nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.bilinear.nrows()
    }

    pub fn all_finite(&self) -> bool {
        self.gcn.iter().chain([&self.bilinear]).all(|w| w.iter().all(|x| x.is_finite()))
    }
}

/// Xavier-uniform weights, zero moments.
pub fn init_params<R: Rng + ?Sized>(f: usize, d: usize, layers: usize, rng: &mut R) -> ModelParams {
    assert!(f >= 1 && d >= 1 && layers >= 1, "dimensions must be positive");
    let mut gcn = vec![xavier_uniform(f, d, rng)];
    for _ in 1..layers {
        gcn.push(xavier_uniform(d, d, rng));
    }
    let bilinear = xavier_uniform(d, d, rng);
    ModelParams::from_weights(gcn, bilinear)
}

/// Layer-wise state kept for backpropagation.
#[derive(Debug, Clone)]
pub struct EncoderTrace {
    /// `Z_l = Â H_{l-1} W_l` per layer.
    pub pre_activations: Vec<Array2<f64>>,
    /// `H_l = ReLU(Z_l)` per layer; the last one is the embedding.
    pub activations: Vec<Array2<f64>>,
    /// `X W_1`, before propagation.
    pub first_product: Array2<f64>,
}

impl EncoderTrace {
    pub fn embeddings(&self) -> &Array2<f64> {
        self.activations.last().expect("at least one layer")
    }
}

/// `H = ReLU(Â X W)` stacked over the configured layers.
pub fn encode(adj: &NormalizedAdjacency, x: &FeatureMatrix, params: &ModelParams) -> Result<EncoderTrace> {
    if x.dim() != params.input_dim() {
        return Err(Error::Contract(format!(
            "features have {} columns, encoder expects {}",
            x.dim(),
            params.input_dim()
        )));
    }
    if x.n() != adj.n() {
        return Err(Error::Contract("feature rows and adjacency disagree".into()));
    }
    let mut pre_activations = Vec::with_capacity(params.gcn.len());
    let mut activations: Vec<Array2<f64>> = Vec::with_capacity(params.gcn.len());
    let first_product = x.matmul(&params.gcn[0]);
    for (l, w) in params.gcn.iter().enumerate() {
        let z = match activations.last() {
            None => adj.matmul(&first_product),
            Some(h) => adj.matmul(&h.dot(w)),
        };
        debug_assert_eq!(l, pre_activations.len());
        activations.push(z.mapv(|v| v.max(0.0)));
        pre_activations.push(z);
    }
    Ok(EncoderTrace {
        pre_activations,
        activations,
        first_product,
    })
}

/// Mean of the embedding rows in each set.
pub fn readout(h: &Array2<f64>, sets: &[Vec<usize>]) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((sets.len(), h.ncols()));
    for (i, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(Error::Contract(format!("empty readout set for node {i}")));
        }
        let mut row = out.row_mut(i);
        for &j in set {
            row += &h.row(j);
        }
        row /= set.len() as f64;
    }
    Ok(out)
}

/// Readout with the set owner's features removed from every member:
/// row `k` is the mean over `j` in set `k` of `ReLU(Z_j − Â_jk (XW)_k)`.
/// Defined for single-layer encoders.
pub fn masked_readout(
    enc: &EncoderTrace,
    adj: &NormalizedAdjacency,
    sets: &[Vec<usize>],
) -> Result<Array2<f64>> {
    if enc.pre_activations.len() != 1 {
        return Err(Error::Contract("anchor masking needs a single-layer encoder".into()));
    }
    let z = &enc.pre_activations[0];
    let t = &enc.first_product;
    let mut out = Array2::zeros((sets.len(), z.ncols()));
    for (k, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(Error::Contract(format!("empty readout set for node {k}")));
        }
        let mut row = out.row_mut(k);
        for &j in set {
            let a = adj.weight(j, k).unwrap_or(0.0);
            Zip::from(&mut row)
                .and(z.row(j))
                .and(t.row(k))
                .for_each(|o, &zv, &tv| *o += (zv - a * tv).max(0.0));
        }
        row /= set.len() as f64;
    }
    Ok(out)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `σ(h_neighbor · W · h_nodeᵀ)`.
pub fn discriminate(h_neighbor: ArrayView1<f64>, h_node: ArrayView1<f64>, params: &ModelParams) -> f64 {
    sigmoid(h_neighbor.dot(&params.bilinear.dot(&h_node)))
}

/// Contrast pairs drawn for one view: each node's RWR set and the node
/// whose set serves as its negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSampling {
    pub pos_sets: Vec<Vec<usize>>,
    pub neg_nodes: Vec<usize>,
}

/// Samples every node's RWR context and a uniform negative partner from
/// `V \ {i}`. Each node draws from its own derived stream.
pub fn sample_pairs<R: Rng + ?Sized>(
    view: &AttributedGraph,
    restart_prob: f64,
    rwr_size: usize,
    rng: &mut R,
) -> ViewSampling {
    let n = view.n();
    let base: u64 = rng.random();
    let (pos_sets, neg_nodes): (Vec<Vec<usize>>, Vec<usize>) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = derive_rng(base, &[i as u64]);
            let set = rwr_sample(view, i, restart_prob, rwr_size, &mut r);
            let neg = if n < 2 {
                i
            } else {
                let slot = r.random_range(0..n - 1);
                if slot >= i {
                    slot + 1
                } else {
                    slot
                }
            };
            (set, neg)
        })
        .unzip();
    ViewSampling { pos_sets, neg_nodes }
}

/// Everything one view's forward pass produced.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub encoder: EncoderTrace,
    /// `h_{N_i}` for every node, pooled over its own RWR set.
    pub neighbor_reprs: Array2<f64>,
    pub mask_anchor: bool,
    pub sampling: ViewSampling,
    pub pos_logits: Array1<f64>,
    pub neg_logits: Array1<f64>,
    pub pos_scores: Array1<f64>,
    pub neg_scores: Array1<f64>,
}

impl ForwardTrace {
    pub fn embeddings(&self) -> &Array2<f64> {
        self.encoder.embeddings()
    }

    pub fn n(&self) -> usize {
        self.pos_scores.len()
    }
}

/// Discriminator logits for given embeddings, readouts and negatives.
pub(crate) fn pair_logits(
    h: &Array2<f64>,
    readouts: &Array2<f64>,
    neg_nodes: &[usize],
    bilinear: &Array2<f64>,
) -> (Array1<f64>, Array1<f64>) {
    // u_i = W h_iᵀ, stored as rows.
    let u = h.dot(&bilinear.t());
    let pos = Zip::from(readouts.rows())
        .and(u.rows())
        .map_collect(|r, ui| r.dot(&ui));
    let neg = Array1::from_iter(
        neg_nodes
            .iter()
            .enumerate()
            .map(|(i, &j)| readouts.row(j).dot(&u.row(i))),
    );
    (pos, neg)
}

/// Deterministic forward pass under a fixed sampling.
pub fn forward_with(
    adj: &NormalizedAdjacency,
    x: &FeatureMatrix,
    params: &ModelParams,
    sampling: ViewSampling,
    mask_anchor: bool,
) -> Result<ForwardTrace> {
    if sampling.pos_sets.len() != x.n() || sampling.neg_nodes.len() != x.n() {
        return Err(Error::Contract("sampling does not cover every node".into()));
    }
    let encoder = encode(adj, x, params)?;
    let neighbor_reprs = if mask_anchor {
        masked_readout(&encoder, adj, &sampling.pos_sets)?
    } else {
        readout(encoder.embeddings(), &sampling.pos_sets)?
    };
    let (pos_logits, neg_logits) = pair_logits(
        encoder.embeddings(),
        &neighbor_reprs,
        &sampling.neg_nodes,
        &params.bilinear,
    );
    Ok(ForwardTrace {
        pos_scores: pos_logits.mapv(sigmoid),
        neg_scores: neg_logits.mapv(sigmoid),
        encoder,
        neighbor_reprs,
        mask_anchor,
        sampling,
        pos_logits,
        neg_logits,
    })
}

/// Samples contrast pairs on `view` and runs the forward pass.
pub fn forward_view<R: Rng + ?Sized>(
    view: &AttributedGraph,
    params: &ModelParams,
    rng: &mut R,
    config: &RunConfig,
) -> Result<ForwardTrace> {
    let sampling = sample_pairs(view, config.restart_prob, config.rwr_size, rng);
    forward_with(
        &normalized_adjacency(view),
        &FeatureMatrix::from_dense(view.features()),
        params,
        sampling,
        config.mask_anchor,
    )
}

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, DegreePartition, FeatureSimilarity};
use crate::sampling::{derive_rng, sample_without_replacement};

/// Unnormalized sampling weight of each neighbor of `u`:
/// `1/|N_u| · max(0, sim(x_v, x_u))`, aligned with `g.neighbors(u)`.
pub fn pruning_weights(g: &AttributedGraph, u: usize, sims: &FeatureSimilarity) -> Vec<f64> {
    let nb = g.neighbors(u);
    let uniform = 1.0 / nb.len() as f64;
    nb.iter()
        .map(|&v| uniform * sims.pair(u, v).max(0.0))
        .collect()
}

/// Draws `k` distinct neighbors of head node `u`, each draw proportional to
/// the pruning weights of the neighbors not yet taken.
pub fn prune_head_node<R: Rng + ?Sized>(
    g: &AttributedGraph,
    u: usize,
    k: usize,
    sims: &FeatureSimilarity,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if g.degree(u) <= k {
        return Err(Error::Contract(format!(
            "node {u} has degree {} <= K={k}, not a head node",
            g.degree(u)
        )));
    }
    let nb = g.neighbors(u);
    let weights = pruning_weights(g, u, sims);
    Ok(sample_without_replacement(&weights, k, rng)
        .into_iter()
        .map(|i| nb[i])
        .collect())
}

/// Forges head nodes into tail nodes.
///
/// A head node keeps an edge only if it sampled it, except that an edge
/// between two head nodes survives when either endpoint sampled it. Edges
/// between tail nodes are untouched.
pub fn build_pruned_view<R: Rng + ?Sized>(
    g: &AttributedGraph,
    partition: &DegreePartition,
    sims: &FeatureSimilarity,
    rng: &mut R,
) -> AttributedGraph {
    let base: u64 = rng.random();
    let k = partition.k_threshold();
    let retained: Vec<(usize, Vec<usize>)> = partition
        .head_nodes()
        .par_iter()
        .map(|&u| {
            let mut node_rng = derive_rng(base, &[u as u64]);
            let kept = prune_head_node(g, u, k, sims, &mut node_rng).expect("head node");
            (u, kept)
        })
        .collect();

    let mut adjacency: Vec<Vec<usize>> = (0..g.n())
        .map(|v| {
            if partition.is_head(v) {
                Vec::new()
            } else {
                g.neighbors(v)
                    .iter()
                    .copied()
                    .filter(|&u| partition.is_tail(u))
                    .collect()
            }
        })
        .collect();
    for (u, kept) in retained {
        for v in kept {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
    }
    AttributedGraph::from_adjacency(adjacency, g.features().clone())
}

use rand::{Rng, RngCore};
use rayon::prelude::*;

use super::ScoreWindow;
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, DegreePartition, FeatureSimilarity};
use crate::sampling::{derive_rng, weighted_index};

/// Source of target degrees for completed tail nodes.
pub trait DegreeSampler: Sync {
    fn draw(&self, rng: &mut dyn RngCore) -> usize;
}

impl<F> DegreeSampler for F
where
    F: Fn(&mut dyn RngCore) -> usize + Sync,
{
    fn draw(&self, rng: &mut dyn RngCore) -> usize {
        self(rng)
    }
}

/// The empirical degree distribution of a graph: a uniformly chosen node's
/// degree.
#[derive(Debug, Clone)]
pub struct EmpiricalDegrees(Vec<usize>);

impl EmpiricalDegrees {
    pub fn of(g: &AttributedGraph) -> Self {
        EmpiricalDegrees(g.degrees())
    }
}

impl DegreeSampler for EmpiricalDegrees {
    fn draw(&self, rng: &mut dyn RngCore) -> usize {
        if self.0.is_empty() {
            return 0;
        }
        self.0[rng.random_range(0..self.0.len())]
    }
}

/// Everything completion reads: the graph being augmented, the recent
/// score history and the attribute similarities.
#[derive(Clone, Copy)]
pub struct CompletionContext<'a> {
    pub graph: &'a AttributedGraph,
    pub window: &'a ScoreWindow,
    pub sims: &'a FeatureSimilarity,
}

impl CompletionContext<'_> {
    fn check(&self) -> Result<()> {
        if self.window.filled_epochs() == 0 {
            return Err(Error::Contract("completion needs at least one recorded epoch".into()));
        }
        if self.window.n() != self.graph.n() || self.sims.n() != self.graph.n() {
            return Err(Error::Contract("window, similarities and graph disagree on n".into()));
        }
        if self.graph.n() < 2 {
            return Err(Error::Contract("completion needs at least two nodes".into()));
        }
        Ok(())
    }

    /// `p_nc(u|v) = max(0, sim(x_u, x_v)) · S_u·S_v` for every `u`, zero at `v`.
    fn nc_weights(&self, v: usize) -> Vec<f64> {
        let n = self.graph.n();
        let mut sims = vec![0.0; n];
        self.sims.to_all(v, &mut sims);
        let mut ano = vec![0.0; n];
        self.window.dot_all(v, &mut ano);
        let mut w: Vec<f64> = sims.iter().zip(&ano).map(|(s, a)| s.max(0.0) * a).collect();
        w[v] = 0.0;
        w
    }

    fn nc_weight(&self, v: usize, u: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        self.sims.pair(v, u).max(0.0) * self.window.dot(v, u)
    }
}

fn draw_auxiliary<R: Rng + ?Sized>(v: usize, weights: &[f64], rng: &mut R) -> usize {
    weighted_index(weights, rng).unwrap_or_else(|| {
        // Nothing carries weight: uniform over V \ {v}.
        let slot = rng.random_range(0..weights.len() - 1);
        if slot >= v {
            slot + 1
        } else {
            slot
        }
    })
}

/// Samples the auxiliary node whose ego network is blended into tail node
/// `v`'s neighborhood.
pub fn sample_auxiliary<R: Rng + ?Sized>(
    ctx: &CompletionContext<'_>,
    v: usize,
    rng: &mut R,
) -> Result<usize> {
    ctx.check()?;
    Ok(draw_auxiliary(v, &ctx.nc_weights(v), rng))
}

/// Mixing ratio of the auxiliary node: half its weight relative to the best
/// candidate, so the anchor's own neighborhood always keeps at least half
/// the mass. `0.25` when no candidate has weight.
pub fn mixup_phi(weights: &[f64], auxiliary: usize) -> f64 {
    let best = weights.iter().copied().fold(0.0f64, f64::max);
    if !(best > 0.0) {
        return 0.25;
    }
    (0.5 * weights[auxiliary] / best).clamp(f64::MIN_POSITIVE, 0.5)
}

/// A tail node's completed neighborhood and the distribution it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MixupNeighborhood {
    pub anchor: usize,
    pub auxiliary: usize,
    pub phi: f64,
    /// Mixture distribution over its positive support, node ids ascending.
    pub distribution: Vec<(usize, f64)>,
    /// Draws from `distribution`, in draw order.
    pub sampled: Vec<usize>,
    /// Original neighbors plus the new draws, ascending.
    pub neighbors: Vec<usize>,
}

/// Weights over `support`, renormalized to sum to one; uniform if none is
/// positive.
fn normalized_term(support: &[usize], weights: impl Fn(usize) -> f64) -> Vec<(usize, f64)> {
    if support.is_empty() {
        return Vec::new();
    }
    let raw: Vec<f64> = support.iter().map(|&u| weights(u).max(0.0)).collect();
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        support.iter().zip(raw).map(|(&u, w)| (u, w / total)).collect()
    } else {
        let p = 1.0 / support.len() as f64;
        support.iter().map(|&u| (u, p)).collect()
    }
}

/// Enlarges tail node `v`'s neighborhood by mixing its ego network with
/// that of an auxiliary node.
///
/// The mixture is `(1-φ)·p_v + φ·p_a`, where each term is
/// `p(·|x)·p_nc(·|x)` renormalized over `x`'s neighbors (the anchor itself
/// excluded). Draws are taken without replacement until the neighborhood
/// reaches a degree drawn from `degrees`, never shrinking below the
/// original degree; original neighbors are always kept.
pub fn complete_tail_node<R: Rng>(
    ctx: &CompletionContext<'_>,
    v: usize,
    degrees: &dyn DegreeSampler,
    rng: &mut R,
) -> Result<MixupNeighborhood> {
    ctx.check()?;
    let g = ctx.graph;
    let weights_v = ctx.nc_weights(v);
    let a = draw_auxiliary(v, &weights_v, rng);
    let phi = mixup_phi(&weights_v, a);

    let own = normalized_term(g.neighbors(v), |u| weights_v[u]);
    let aux_support: Vec<usize> = g.neighbors(a).iter().copied().filter(|&u| u != v).collect();
    let aux = normalized_term(&aux_support, |u| ctx.nc_weight(a, u));
    let (own_mass, aux_mass) = match (own.is_empty(), aux.is_empty()) {
        (false, false) => (1.0 - phi, phi),
        (true, false) => (0.0, 1.0),
        (false, true) => (1.0, 0.0),
        (true, true) => (0.0, 0.0),
    };
    let mut distribution: Vec<(usize, f64)> = Vec::with_capacity(own.len() + aux.len());
    {
        // Merge two ascending supports.
        let (mut i, mut j) = (0, 0);
        while i < own.len() || j < aux.len() {
            let take_own = j >= aux.len() || (i < own.len() && own[i].0 <= aux[j].0);
            let take_aux = i >= own.len() || (j < aux.len() && aux[j].0 <= own[i].0);
            let node = if take_own { own[i].0 } else { aux[j].0 };
            let mut p = 0.0;
            if take_own {
                p += own_mass * own[i].1;
                i += 1;
            }
            if take_aux {
                p += aux_mass * aux[j].1;
                j += 1;
            }
            distribution.push((node, p));
        }
    }

    distribution.retain(|&(_, p)| p > 0.0);

    let target = degrees.draw(rng).max(g.degree(v));
    let mut remaining: Vec<f64> = distribution.iter().map(|&(_, p)| p).collect();
    let mut neighbors: Vec<usize> = g.neighbors(v).to_vec();
    let mut sampled = Vec::new();
    while neighbors.len() < target {
        let Some(idx) = weighted_index(&remaining, rng) else {
            break;
        };
        remaining[idx] = 0.0;
        let u = distribution[idx].0;
        sampled.push(u);
        if let Err(pos) = neighbors.binary_search(&u) {
            neighbors.insert(pos, u);
        }
    }
    Ok(MixupNeighborhood {
        anchor: v,
        auxiliary: a,
        phi,
        distribution,
        sampled,
        neighbors,
    })
}

/// Replaces every tail node's neighborhood with its completed one. Edges
/// are added symmetrically, so nothing is ever removed.
pub fn build_completed_view<R: Rng + ?Sized>(
    ctx: &CompletionContext<'_>,
    partition: &DegreePartition,
    degrees: &dyn DegreeSampler,
    rng: &mut R,
) -> Result<AttributedGraph> {
    ctx.check()?;
    let base: u64 = rng.random();
    let completed: Vec<MixupNeighborhood> = partition
        .tail_nodes()
        .par_iter()
        .map(|&v| {
            let mut node_rng = derive_rng(base, &[v as u64]);
            complete_tail_node(ctx, v, degrees, &mut node_rng)
        })
        .collect::<Result<_>>()?;
    let mut adjacency = ctx.graph.adjacency_lists();
    for m in completed {
        for &u in &m.neighbors {
            adjacency[m.anchor].push(u);
            adjacency[u].push(m.anchor);
        }
    }
    Ok(AttributedGraph::from_adjacency(adjacency, ctx.graph.features().clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{l2_normalize_features, partition_by_degree};
    use crate::sampling::rng_from_seed;
    use ndarray::Array2;

    fn uniform_setup(n: usize, edges: &[(usize, usize)]) -> (AttributedGraph, ScoreWindow, FeatureSimilarity) {
        let g = AttributedGraph::from_edges(edges, Array2::ones((n, 3))).unwrap();
        let mut sw = ScoreWindow::new(n, 2);
        sw.push(&vec![1.0; n], &vec![1.0; n]).unwrap();
        let sims = FeatureSimilarity::new(&l2_normalize_features(&g));
        (g, sw, sims)
    }

    fn fixed(d: usize) -> impl Fn(&mut dyn RngCore) -> usize + Sync {
        move |_: &mut dyn RngCore| d
    }

    #[test]
    fn empty_window_is_a_contract_error() {
        let (g, _, sims) = uniform_setup(3, &[(0, 1)]);
        let sw = ScoreWindow::new(3, 2);
        let ctx = CompletionContext { graph: &g, window: &sw, sims: &sims };
        assert!(matches!(sample_auxiliary(&ctx, 0, &mut rng_from_seed(0)), Err(Error::Contract(_))));
    }

    #[test]
    fn single_positive_weight_is_always_chosen() {
        // Only node 2 shares attributes with node 0.
        let x = ndarray::array![[1.0, 0.0], [0.0, 1.0], [2.0, 0.0], [0.0, 3.0]];
        let g = AttributedGraph::from_edges(&[], x).unwrap();
        let mut sw = ScoreWindow::new(4, 1);
        sw.push(&[1.0; 4], &[0.5; 4]).unwrap();
        let sims = FeatureSimilarity::new(&l2_normalize_features(&g));
        let ctx = CompletionContext { graph: &g, window: &sw, sims: &sims };
        let mut rng = rng_from_seed(9);
        for _ in 0..500 {
            assert_eq!(sample_auxiliary(&ctx, 0, &mut rng).unwrap(), 2);
        }
    }

    #[test]
    fn best_candidate_gets_half() {
        let w = [0.0, 0.2, 0.8, 0.4];
        assert_eq!(mixup_phi(&w, 2), 0.5);
        assert_eq!(mixup_phi(&w, 3), 0.25);
        assert_eq!(mixup_phi(&[0.0, 0.0], 1), 0.25);
    }

    #[test]
    fn isolated_anchor_draws_from_auxiliary_term() {
        // Node 0 isolated; the others form a star around 1.
        let (g, sw, sims) = uniform_setup(5, &[(1, 2), (1, 3), (1, 4)]);
        let ctx = CompletionContext { graph: &g, window: &sw, sims: &sims };
        let mut rng = rng_from_seed(4);
        for _ in 0..200 {
            let m = complete_tail_node(&ctx, 0, &fixed(2), &mut rng).unwrap();
            assert_eq!(m.neighbors.len(), 2.min(m.distribution.len()));
            let aux_nb = g.neighbors(m.auxiliary);
            assert!(m.neighbors.iter().all(|u| aux_nb.contains(u)));
            let total: f64 = m.distribution.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn original_neighbors_are_preserved() {
        let (g, sw, sims) = uniform_setup(8, &[(0, 1), (0, 2), (3, 4), (4, 5), (5, 6), (6, 7), (2, 7)]);
        let p = partition_by_degree(&g, 1).unwrap();
        let ctx = CompletionContext { graph: &g, window: &sw, sims: &sims };
        for seed in 0..20 {
            let view = build_completed_view(&ctx, &p, &EmpiricalDegrees::of(&g), &mut rng_from_seed(seed)).unwrap();
            assert!(g.edge_set().is_subset(&view.edge_set()));
        }
    }

    #[test]
    fn no_tail_nodes_is_identity() {
        let edges: Vec<_> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        let (g, sw, sims) = uniform_setup(4, &edges);
        let p = partition_by_degree(&g, 2).unwrap();
        assert!(p.tail_nodes().is_empty());
        let ctx = CompletionContext { graph: &g, window: &sw, sims: &sims };
        let view = build_completed_view(&ctx, &p, &EmpiricalDegrees::of(&g), &mut rng_from_seed(0)).unwrap();
        assert_eq!(view, g);
    }

    #[test]
    fn uniform_mixture_has_closed_form() {
        // v=0 with neighbors {1,2}; hub 3 links {5,6,7}. All weights are
        // equal, so both terms are uniform and phi is exactly 0.5.
        let (g, sw, sims) = uniform_setup(8, &[(0, 1), (0, 2), (3, 5), (3, 6), (3, 7)]);
        let ctx = CompletionContext { graph: &g, window: &sw, sims: &sims };
        let mut rng = rng_from_seed(1);
        for _ in 0..200 {
            let m = complete_tail_node(&ctx, 0, &fixed(3), &mut rng).unwrap();
            assert_eq!(m.phi, 0.5);
            let nb_a: Vec<usize> = g.neighbors(m.auxiliary).iter().copied().filter(|&u| u != 0).collect();
            for &(u, p) in &m.distribution {
                let mut expected = 0.0;
                if u == 1 || u == 2 {
                    expected += 0.5 / 2.0;
                }
                if nb_a.contains(&u) {
                    expected += 0.5 / nb_a.len() as f64;
                }
                if nb_a.is_empty() && (u == 1 || u == 2) {
                    expected = 0.5;
                }
                assert!((p - expected).abs() < 1e-12, "node {u}: {p} vs {expected}");
            }
        }
    }
}

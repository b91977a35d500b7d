//! Benchmark anomaly injection: dense cliques for structural anomalies and
//! far-feature swaps for contextual ones.

use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::io::{AnomalyKind, Labels};

/// Candidates examined per feature anomaly.
pub const DEFAULT_K_CANDIDATES: usize = 50;
pub const DEFAULT_CLIQUE_SIZE: usize = 15;

/// Clique count per dataset at clique size 15, chosen so that the total
/// anomaly rate `2·p·q/n` matches the published benchmark statistics.
pub fn default_clique_count(dataset: &str) -> Option<usize> {
    let q = match dataset.to_ascii_lowercase().as_str() {
        "cora" => 5,
        "citeseer" => 5,
        "pubmed" => 20,
        "bitcoinotc" => 10,
        "bitotc" => 10,
        "bitalpha" => 10,
        _ => return None,
    };
    Some(q)
}

/// Outcome of an injection pass.
#[derive(Debug, Clone)]
pub struct Injected {
    pub graph: AttributedGraph,
    /// Newly labeled nodes, in selection order.
    pub nodes: Vec<usize>,
    pub labels: Labels,
}

fn clean_nodes(labels: &Labels) -> Vec<usize> {
    (0..labels.len()).filter(|&v| !labels.is_anomalous(v)).collect()
}

/// Connects `q` disjoint groups of `p` previously clean nodes into cliques.
pub fn inject_structural<R: Rng + ?Sized>(
    g: &AttributedGraph,
    labels: &Labels,
    clique_size: usize,
    clique_count: usize,
    rng: &mut R,
) -> Result<Injected> {
    if clique_size < 2 {
        return Err(Error::Parameter("clique size must be at least 2".into()));
    }
    let mut clean = clean_nodes(labels);
    let needed = clique_size * clique_count;
    if needed > clean.len() {
        return Err(Error::Parameter(format!(
            "{clique_count} cliques of {clique_size} need {needed} clean nodes, only {} available",
            clean.len()
        )));
    }
    let mut adjacency = g.adjacency_lists();
    let mut labels = labels.clone();
    let mut nodes = Vec::with_capacity(needed);
    for _ in 0..clique_count {
        let members: Vec<usize> = index::sample(rng, clean.len(), clique_size)
            .into_iter()
            .map(|i| clean[i])
            .collect();
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
            labels.mark(a, AnomalyKind::Structural);
        }
        clean.retain(|v| !members.contains(v));
        nodes.extend(members);
    }
    Ok(Injected {
        graph: AttributedGraph::from_adjacency(adjacency, g.features().clone()),
        nodes,
        labels,
    })
}

/// Replaces the attributes of `count` clean nodes with those of the most
/// distant node among `k_candidates` random candidates. Distances and copies
/// use the pre-injection attributes, so swaps never chain.
pub fn inject_feature<R: Rng + ?Sized>(
    g: &AttributedGraph,
    labels: &Labels,
    count: usize,
    k_candidates: usize,
    rng: &mut R,
) -> Result<Injected> {
    if k_candidates < 1 {
        return Err(Error::Parameter("k_candidates must be at least 1".into()));
    }
    let clean = clean_nodes(labels);
    if count > clean.len() {
        return Err(Error::Parameter(format!(
            "{count} feature anomalies requested, only {} clean nodes",
            clean.len()
        )));
    }
    let n = g.n();
    if count > 0 && n < 2 {
        return Err(Error::Parameter("feature injection needs at least two nodes".into()));
    }
    let original = g.features();
    let mut features = original.clone();
    let mut labels = labels.clone();
    let targets: Vec<usize> = index::sample(rng, clean.len(), count)
        .into_iter()
        .map(|i| clean[i])
        .collect();
    let k = k_candidates.min(n - 1);
    for &target in &targets {
        // Candidates from V \ {target}: sample over n-1 slots and skip the target.
        let mut best: Option<(usize, f64)> = None;
        for slot in index::sample(rng, n - 1, k) {
            let c = if slot >= target { slot + 1 } else { slot };
            let dist: f64 = original
                .row(target)
                .iter()
                .zip(original.row(c))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if best.is_none_or(|(_, d)| dist > d) {
                best = Some((c, dist));
            }
        }
        let (source, _) = best.expect("at least one candidate");
        features.row_mut(target).assign(&original.row(source));
        labels.mark(target, AnomalyKind::Feature);
    }
    Ok(Injected {
        graph: g.with_features(features)?,
        nodes: targets,
        labels,
    })
}

/// Parameters recorded alongside an injected dataset.
#[derive(Debug, Clone, Serialize)]
pub struct InjectionManifest {
    pub clique_size: usize,
    pub clique_count: usize,
    pub feature_count: usize,
    pub k_candidates: usize,
    pub seed: u64,
    pub nodes: usize,
    pub structural_anomalies: usize,
    pub feature_anomalies: usize,
    pub anomaly_rate: f64,
}

/// Structural injection followed by feature injection on the remaining
/// clean nodes.
pub fn inject_benchmark<R: Rng + ?Sized>(
    g: &AttributedGraph,
    clique_size: usize,
    clique_count: usize,
    feature_count: usize,
    k_candidates: usize,
    rng: &mut R,
) -> Result<(AttributedGraph, Labels)> {
    let structural = inject_structural(g, &Labels::clean(g.n()), clique_size, clique_count, rng)?;
    let feature = inject_feature(
        &structural.graph,
        &structural.labels,
        feature_count,
        k_candidates,
        rng,
    )?;
    Ok((feature.graph, feature.labels))
}

//! Seeded graph generators: a citation-network lookalike with community
//! structure and bag-of-words attributes, and Barabási–Albert graphs.

use std::collections::BTreeSet;

use ndarray::Array2;
use rand::seq::index;
use rand::Rng;

use crate::graph::AttributedGraph;

/// Shape of a generated citation network.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationSpec {
    /// Nodes per community.
    pub community_sizes: Vec<usize>,
    /// Undirected edges in the output.
    pub edges: usize,
    /// Vocabulary size.
    pub features: usize,
    /// Distinct words set per node.
    pub words_per_node: usize,
    /// Vocabulary slice owned by each community.
    pub topic_words: usize,
    /// Chance that a word comes from the node's own topic.
    pub topic_prob: f64,
    /// Chance that an edge stays inside the community.
    pub homophily: f64,
}

impl CitationSpec {
    /// 2708 nodes in seven classes, 5429 edges, 1433 binary attributes.
    pub fn cora_like() -> Self {
        CitationSpec {
            community_sizes: vec![818, 426, 418, 351, 298, 217, 180],
            edges: 5429,
            features: 1433,
            words_per_node: 18,
            topic_words: 160,
            topic_prob: 0.75,
            homophily: 0.8,
        }
    }

    pub fn nodes(&self) -> usize {
        self.community_sizes.iter().sum()
    }
}

/// Picks an endpoint by preferential attachment (weight `degree + 1`)
/// among `pool`.
fn preferential<R: Rng + ?Sized>(pool: &[usize], degree: &[usize], rng: &mut R) -> usize {
    let total_deg: usize = pool.iter().map(|&v| degree[v]).sum();
    let total = total_deg + pool.len();
    let mut t = rng.random_range(0..total);
    if t < pool.len() {
        return pool[t];
    }
    t -= pool.len();
    for &v in pool {
        if t < degree[v] {
            return v;
        }
        t -= degree[v];
    }
    *pool.last().expect("non-empty pool")
}

/// Citation-style graph: nodes arrive in random order and cite earlier
/// nodes by preferential attachment, mostly within their community, until
/// `spec.edges` distinct edges exist. Attributes are binary word
/// indicators drawn from a community topic plus shared background.
pub fn citation_graph<R: Rng + ?Sized>(spec: &CitationSpec, rng: &mut R) -> AttributedGraph {
    let n = spec.nodes();
    let c = spec.community_sizes.len();
    assert!(n >= 2 && c >= 1, "need at least two nodes");
    assert!(spec.topic_words * c <= spec.features, "topics exceed the vocabulary");
    assert!(spec.words_per_node <= spec.features, "more words than vocabulary");
    let max_edges = n * (n - 1) / 2;
    assert!(spec.edges <= max_edges, "too many edges requested");

    let mut community = Vec::with_capacity(n);
    for (k, &size) in spec.community_sizes.iter().enumerate() {
        community.extend(std::iter::repeat_n(k, size));
    }
    // Random arrival order so that communities interleave.
    let arrival: Vec<usize> = index::sample(rng, n, n).into_vec();

    let mut x = Array2::zeros((n, spec.features));
    for v in 0..n {
        let topic = community[v] * spec.topic_words;
        let mut words = BTreeSet::new();
        while words.len() < spec.words_per_node {
            let w = if rng.random::<f64>() < spec.topic_prob {
                topic + rng.random_range(0..spec.topic_words)
            } else {
                rng.random_range(0..spec.features)
            };
            words.insert(w);
        }
        for w in words {
            x[[v, w]] = 1.0;
        }
    }

    let mut degree = vec![0usize; n];
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut arrived_by_comm: Vec<Vec<usize>> = vec![Vec::new(); c];
    let mut arrived: Vec<usize> = Vec::new();
    let per_node = spec.edges as f64 / n as f64;

    let add = |a: usize, b: usize, degree: &mut Vec<usize>, edges: &mut BTreeSet<(usize, usize)>| {
        if a != b && edges.insert((a.min(b), a.max(b))) {
            degree[a] += 1;
            degree[b] += 1;
        }
    };

    for &v in &arrival {
        if !arrived.is_empty() {
            // At least one citation, geometric tail matching the target mean.
            let mut m = 1;
            while rng.random::<f64>() < 1.0 - 1.0 / per_node.max(1.0) {
                m += 1;
            }
            for _ in 0..m {
                if edges.len() >= spec.edges {
                    break;
                }
                let own = &arrived_by_comm[community[v]];
                let pool = if !own.is_empty() && rng.random::<f64>() < spec.homophily {
                    own
                } else {
                    &arrived
                };
                let u = preferential(pool, &degree, rng);
                add(v, u, &mut degree, &mut edges);
            }
        }
        arrived_by_comm[community[v]].push(v);
        arrived.push(v);
    }
    let all: Vec<usize> = (0..n).collect();
    while edges.len() < spec.edges {
        let a = rng.random_range(0..n);
        let pool = if rng.random::<f64>() < spec.homophily {
            &arrived_by_comm[community[a]]
        } else {
            &all
        };
        let b = preferential(pool, &degree, rng);
        add(a, b, &mut degree, &mut edges);
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    AttributedGraph::from_edges(&edges, x).expect("generated ids are in range")
}

/// Barabási–Albert graph: each new node attaches to `m` distinct earlier
/// nodes chosen with probability proportional to degree. Attributes are
/// standard-uniform.
pub fn power_law_graph<R: Rng + ?Sized>(n: usize, m: usize, features: usize, rng: &mut R) -> AttributedGraph {
    assert!(m >= 1 && n > m, "need n > m >= 1");
    let mut endpoints: Vec<usize> = Vec::new();
    let mut edges = Vec::new();
    for v in 1..=m {
        for u in 0..v {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    for v in m + 1..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            targets.insert(endpoints[rng.random_range(0..endpoints.len())]);
        }
        for u in targets {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let x = Array2::from_shape_simple_fn((n, features), || rng.random::<f64>());
    AttributedGraph::from_edges(&edges, x).expect("generated ids are in range")
}

//! Multi-round anomaly scoring: the mean over rounds of `s_n − s_p`.

use ndarray::Array1;

use crate::augment::{build_completed_view, CompletionContext, ScoreWindow};
use crate::config::{RunConfig, ScoreView};
use crate::error::{Error, Result};
use crate::graph::{normalized_adjacency, AttributedGraph};
use crate::graph::NormalizedAdjacency;
use crate::model::{encode, masked_readout, pair_logits, readout, sample_pairs, sigmoid, EncoderTrace, ModelParams};
use crate::sampling::derive_rng;
use crate::trainer::{purpose, Prepared};

/// Per-node anomaly scores in `(−1, 1)`; larger is more anomalous.
///
/// Every round resamples each node's RWR context and negative partner from
/// a stream derived from `(seed, round)`. Rounds accumulate in order.
/// With `ScoreView::CompletionAvg` each round scores on a freshly completed
/// view, which needs the training score window.
pub fn anomaly_scores(
    graph: &AttributedGraph,
    params: &ModelParams,
    rounds: usize,
    seed: u64,
    config: &RunConfig,
    window: Option<&ScoreWindow>,
) -> Result<Vec<f64>> {
    if rounds == 0 {
        return Err(Error::Parameter("at least one scoring round is required".into()));
    }
    let prep = Prepared::new(graph, config.k_threshold)?;
    let n = prep.graph.n();
    let mut acc = Array1::<f64>::zeros(n);
    let fixed = match config.score_view {
        ScoreView::Original => Some(encode(&prep.adjacency, &prep.features, params)?),
        ScoreView::CompletionAvg => {
            match window {
                Some(w) if w.filled_epochs() > 0 => {}
                _ => return Err(Error::Contract("completion_avg scoring needs a filled score window".into())),
            }
            None
        }
    };

    for round in 0..rounds {
        let r = round as u64;
        let view;
        let completed;
        let (graph, adj, trace): (&AttributedGraph, &NormalizedAdjacency, &EncoderTrace) = match &fixed {
            Some(trace) => (&prep.graph, &prep.adjacency, trace),
            None => {
                let ctx = CompletionContext {
                    graph: &prep.graph,
                    window: window.expect("checked above"),
                    sims: &prep.sims,
                };
                let mut rng = derive_rng(seed, &[purpose::SCORE, r, 1]);
                view = build_completed_view(&ctx, &prep.partition, &prep.degrees, &mut rng)?;
                let adj = normalized_adjacency(&view);
                let trace = encode(&adj, &prep.features, params)?;
                completed = (adj, trace);
                (&view, &completed.0, &completed.1)
            }
        };
        let sampling = sample_pairs(
            graph,
            config.restart_prob,
            config.rwr_size,
            &mut derive_rng(seed, &[purpose::SCORE, r]),
        );
        let h = trace.embeddings();
        let reprs = if config.mask_anchor {
            masked_readout(trace, adj, &sampling.pos_sets)?
        } else {
            readout(h, &sampling.pos_sets)?
        };
        let (pos, neg) = pair_logits(h, &reprs, &sampling.neg_nodes, &params.bilinear);
        for i in 0..n {
            acc[i] += sigmoid(neg[i]) - sigmoid(pos[i]);
        }
    }
    let scale = 1.0 / rounds as f64;
    Ok(acc.iter().map(|v| v * scale).collect())
}

//! Training loop: prune-stage then completion-stage views, Adam updates and
//! score-window upkeep.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, Zip};
use serde::Serialize;

use crate::augment::{build_completed_view, build_pruned_view, CompletionContext, EmpiricalDegrees, ScoreWindow};
use crate::config::{RunConfig, Stage2Views};
use crate::error::{Error, Result};
use crate::graph::{
    l2_normalize_features, normalized_adjacency, partition_by_degree, AttributedGraph, DegreePartition,
    FeatureSimilarity, NormalizedAdjacency,
};
use crate::io::DatasetBundle;
use crate::model::{forward_with, init_params, sample_pairs, FeatureMatrix, ModelParams, Moments};
use crate::objective::{backward, GradientSet, LossBreakdown};
use crate::sampling::derive_rng;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Stream identifiers mixed into per-epoch seeds.
pub(crate) mod purpose {
    pub const INIT: u64 = 0;
    pub const VIEW1: u64 = 1;
    pub const VIEW2: u64 = 2;
    pub const PAIRS1: u64 = 3;
    pub const PAIRS2: u64 = 4;
    pub const SCORE: u64 = 5;
}

fn adam_update(w: &mut Array2<f64>, m: &mut Moments, g: &Array2<f64>, lr: f64, b1: f64, b2: f64, eps: f64, t: u64) {
    let c1 = 1.0 - b1.powi(t as i32);
    let c2 = 1.0 - b2.powi(t as i32);
    Zip::from(w)
        .and(&mut m.first)
        .and(&mut m.second)
        .and(g)
        .for_each(|w, m1, m2, &g| {
            *m1 = b1 * *m1 + (1.0 - b1) * g;
            *m2 = b2 * *m2 + (1.0 - b2) * g * g;
            *w -= lr * (*m1 / c1) / ((*m2 / c2).sqrt() + eps);
        });
}

/// One bias-corrected Adam step over every parameter matrix.
pub fn adam_step(params: &mut ModelParams, grads: &GradientSet, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Result<()> {
    if grads.gcn.len() != params.gcn.len()
        || grads.bilinear.dim() != params.bilinear.dim()
        || grads.gcn.iter().zip(&params.gcn).any(|(g, w)| g.dim() != w.dim())
    {
        return Err(Error::Contract("gradient shapes do not match parameters".into()));
    }
    if !(lr > 0.0) {
        return Err(Error::Parameter(format!("learning rate must be positive, got {lr}")));
    }
    if !grads.all_finite() {
        let bad = grads
            .gcn
            .iter()
            .chain([&grads.bilinear])
            .map(|g| g.iter().filter(|v| !v.is_finite()).count())
            .sum::<usize>();
        return Err(Error::NonFinite(format!(
            "{bad} non-finite gradient entries at step {}",
            params.adam.step + 1
        )));
    }
    params.adam.step += 1;
    let t = params.adam.step;
    for ((w, m), g) in params.gcn.iter_mut().zip(&mut params.adam.gcn).zip(&grads.gcn) {
        adam_update(w, m, g, lr, beta1, beta2, eps, t);
    }
    adam_update(&mut params.bilinear, &mut params.adam.bilinear, &grads.bilinear, lr, beta1, beta2, eps, t);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    Original,
    Pruned,
    Completed,
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub stage: u8,
    pub intra: f64,
    pub inter: f64,
    pub total: f64,
    pub wall_ms: u64,
}

/// Hooks into the epoch loop.
pub trait TrainObserver {
    fn on_views(&mut self, _epoch: usize, _stage: u8, _views: [ViewKind; 2]) {}
    fn on_epoch(&mut self, _record: &EpochRecord, _loss: &LossBreakdown) {}
}

impl TrainObserver for () {}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub window: ScoreWindow,
    pub log: Vec<EpochRecord>,
}

/// Inputs shared by every epoch, derived once from the dataset.
pub struct Prepared {
    pub graph: AttributedGraph,
    pub features: FeatureMatrix,
    pub sims: FeatureSimilarity,
    pub partition: DegreePartition,
    pub degrees: EmpiricalDegrees,
    pub adjacency: NormalizedAdjacency,
}

impl Prepared {
    /// Normalizes features and precomputes similarities, the degree
    /// partition and the original graph's adjacency.
    pub fn new(graph: &AttributedGraph, k_threshold: usize) -> Result<Self> {
        let normalized = l2_normalize_features(graph);
        let graph = graph.with_features(normalized)?;
        Ok(Prepared {
            features: FeatureMatrix::from_dense(graph.features()),
            sims: FeatureSimilarity::new(graph.features()),
            partition: partition_by_degree(&graph, k_threshold)?,
            degrees: EmpiricalDegrees::of(&graph),
            adjacency: normalized_adjacency(&graph),
            graph,
        })
    }
}

struct Views {
    kinds: [ViewKind; 2],
    graphs: [Option<AttributedGraph>; 2],
}

fn build_view(prep: &Prepared, kind: ViewKind, window: &ScoreWindow, seed: u64, epoch: u64, slot: u64) -> Result<Option<AttributedGraph>> {
    let mut rng = derive_rng(seed, &[slot, epoch]);
    Ok(match kind {
        ViewKind::Original => None,
        ViewKind::Pruned => Some(build_pruned_view(&prep.graph, &prep.partition, &prep.sims, &mut rng)),
        ViewKind::Completed => {
            let ctx = CompletionContext {
                graph: &prep.graph,
                window,
                sims: &prep.sims,
            };
            Some(build_completed_view(&ctx, &prep.partition, &prep.degrees, &mut rng)?)
        }
    })
}

/// View kinds for an epoch under the schedule and ablation flags.
pub fn scheduled_views(config: &RunConfig, epoch: usize, window_filled: bool) -> (u8, [ViewKind; 2]) {
    let pruned = if config.disable_np {
        ViewKind::Original
    } else {
        ViewKind::Pruned
    };
    let stage1 = [ViewKind::Original, pruned];
    if epoch <= config.stage_switch_epoch || config.disable_nc {
        return (1, stage1);
    }
    if !window_filled {
        return (2, stage1);
    }
    let views = match config.stage2_views {
        Stage2Views::CompletionPair => [ViewKind::Completed, ViewKind::Completed],
        Stage2Views::CompletionPlusPruned => [ViewKind::Completed, pruned],
    };
    (2, views)
}

/// Trains from scratch on `bundle`. Every random draw derives from
/// `config.seed`, so equal inputs give bitwise-equal outcomes.
pub fn train(bundle: &DatasetBundle, config: &RunConfig, observer: &mut dyn TrainObserver) -> Result<TrainOutcome> {
    config.validate()?;
    if bundle.graph.feature_dim() == 0 {
        return Err(Error::Input("graph has no feature columns".into()));
    }
    let prep = Prepared::new(&bundle.graph, config.k_threshold)?;
    let n = prep.graph.n();
    let seed = config.seed;
    let mut params = init_params(
        prep.graph.feature_dim(),
        config.d,
        config.gcn_layers,
        &mut derive_rng(seed, &[purpose::INIT]),
    );
    let mut window = ScoreWindow::new(n, config.w);
    let mut log = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        let (stage, kinds) = scheduled_views(config, epoch, window.filled_epochs() > 0);
        observer.on_views(epoch, stage, kinds);
        let e = epoch as u64;
        let views = Views {
            kinds,
            graphs: [
                build_view(&prep, kinds[0], &window, seed, e, purpose::VIEW1)?,
                build_view(&prep, kinds[1], &window, seed, e, purpose::VIEW2)?,
            ],
        };
        let adjs: Vec<Option<NormalizedAdjacency>> = views.graphs.iter().map(|g| g.as_ref().map(normalized_adjacency)).collect();
        let mut traces = Vec::with_capacity(2);
        for (v, pairs_purpose) in [(0, purpose::PAIRS1), (1, purpose::PAIRS2)] {
            let graph = views.graphs[v].as_ref().unwrap_or(&prep.graph);
            let adj = adjs[v].as_ref().unwrap_or(&prep.adjacency);
            let sampling = sample_pairs(graph, config.restart_prob, config.rwr_size, &mut derive_rng(seed, &[pairs_purpose, e]));
            traces.push(forward_with(adj, &prep.features, &params, sampling, config.mask_anchor)?);
        }
        let adj_refs = [
            adjs[0].as_ref().unwrap_or(&prep.adjacency),
            adjs[1].as_ref().unwrap_or(&prep.adjacency),
        ];
        let (loss, grads) = backward([&traces[0], &traces[1]], adj_refs, &prep.features, &params, config)?;
        if !loss.total.is_finite() {
            return Err(Error::NonFinite(format!("loss is {} at epoch {epoch}", loss.total)));
        }
        adam_step(&mut params, &grads, config.learning_rate, BETA1, BETA2, EPSILON)?;
        if !params.all_finite() {
            return Err(Error::NonFinite(format!("parameters became non-finite at epoch {epoch}")));
        }

        let pos = (&traces[0].pos_scores + &traces[1].pos_scores).to_vec();
        let neg = (&traces[0].neg_scores + &traces[1].neg_scores).to_vec();
        window.push(&pos, &neg)?;

        let record = EpochRecord {
            epoch,
            stage,
            intra: loss.intra(),
            inter: loss.inter(),
            total: loss.total,
            wall_ms: started.elapsed().as_millis() as u64,
        };
        log::debug!(
            "epoch {epoch} stage {stage} views {:?} loss {:.6}",
            views.kinds,
            loss.total
        );
        observer.on_epoch(&record, &loss);
        log.push(record);
    }
    Ok(TrainOutcome { params, window, log })
}

/// Writes the log as newline-delimited JSON.
pub fn write_log(log: &[EpochRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for rec in log {
        let line = serde_json::to_string(rec).expect("record serializes");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

//! Run configuration: hyperparameters, schedule, and ablation switches.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Composition of the per-node score vector contrasted across views.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScoreContrastMode {
    PosOnly,
    #[default]
    PosNeg,
}

/// View pair used once completion starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Stage2Views {
    #[default]
    CompletionPair,
    CompletionPlusPruned,
}

/// Graph the inference-time estimator runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScoreView {
    #[default]
    Original,
    CompletionAvg,
}

/// Negatives used for tail/head metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StratifyMode {
    /// Anomalies and normals both restricted to the stratum.
    #[default]
    WithinStratum,
    /// Stratum anomalies ranked against every normal node.
    StratumVsAllNormals,
}

/// Learning rate and epoch count for the benchmark datasets.
pub fn dataset_defaults(name: &str) -> Option<(f64, usize)> {
    let key = name.to_ascii_lowercase();
    let v = match key.as_str() {
        "cora" => (5e-3, 200),
        "citeseer" => (3e-3, 200),
        "pubmed" => (4e-3, 100),
        "bitcoinotc" => (4e-4, 100),
        "bitotc" => (5e-4, 100),
        "bitalpha" => (5e-3, 100),
        "reddit" => (5e-4, 300),
        "tolokers" => (4e-2, 300),
        _ => return None,
    };
    Some(v)
}

const FALLBACK_LEARNING_RATE: f64 = 1e-3;
const FALLBACK_EPOCHS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset name; selects learning-rate and epoch defaults.
    pub dataset: Option<String>,
    /// Hidden dimension.
    pub d: usize,
    /// Scoring rounds.
    pub r: usize,
    /// Score window length in epochs.
    pub w: usize,
    pub tau: f64,
    pub alpha: f64,
    pub k_threshold: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub stage_switch_epoch: usize,
    pub restart_prob: f64,
    pub rwr_size: usize,
    pub seed: u64,
    pub gcn_layers: usize,
    pub normalize_infonce_rows: bool,
    /// Drop each anchor's own contribution from its context readout.
    /// Single-layer encoders only.
    pub mask_anchor: bool,
    pub score_contrast_mode: ScoreContrastMode,
    pub stage2_views: Stage2Views,
    pub score_view: ScoreView,
    pub stratify_mode: StratifyMode,
    pub disable_np: bool,
    pub disable_nc: bool,
    pub disable_intra: bool,
    pub disable_inter: bool,
}

/// Every key optional; anything missing is filled in by [`RunConfig::resolve`].
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    dataset: Option<String>,
    d: Option<usize>,
    r: Option<usize>,
    w: Option<usize>,
    tau: Option<f64>,
    alpha: Option<f64>,
    k_threshold: Option<usize>,
    learning_rate: Option<f64>,
    epochs: Option<usize>,
    stage_switch_epoch: Option<usize>,
    restart_prob: Option<f64>,
    rwr_size: Option<usize>,
    seed: Option<u64>,
    gcn_layers: Option<usize>,
    normalize_infonce_rows: Option<bool>,
    mask_anchor: Option<bool>,
    score_contrast_mode: Option<ScoreContrastMode>,
    stage2_views: Option<Stage2Views>,
    score_view: Option<ScoreView>,
    stratify_mode: Option<StratifyMode>,
    disable_np: Option<bool>,
    disable_nc: Option<bool>,
    disable_intra: Option<bool>,
    disable_inter: Option<bool>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::resolve(PartialConfig::default())
    }
}

impl RunConfig {
    /// Defaults for a named dataset (learning rate and epochs from the
    /// benchmark table, everything else shared).
    pub fn for_dataset(name: &str) -> Self {
        RunConfig::resolve(PartialConfig {
            dataset: Some(name.to_string()),
            ..PartialConfig::default()
        })
    }

    fn resolve(p: PartialConfig) -> Self {
        let (lr_default, epochs_default) = p
            .dataset
            .as_deref()
            .and_then(dataset_defaults)
            .unwrap_or((FALLBACK_LEARNING_RATE, FALLBACK_EPOCHS));
        let epochs = p.epochs.unwrap_or(epochs_default);
        RunConfig {
            dataset: p.dataset,
            d: p.d.unwrap_or(64),
            r: p.r.unwrap_or(256),
            w: p.w.unwrap_or(5),
            tau: p.tau.unwrap_or(0.07),
            alpha: p.alpha.unwrap_or(0.2),
            k_threshold: p.k_threshold.unwrap_or(6),
            learning_rate: p.learning_rate.unwrap_or(lr_default),
            epochs,
            stage_switch_epoch: p.stage_switch_epoch.unwrap_or((epochs / 2).max(1).min(epochs)),
            restart_prob: p.restart_prob.unwrap_or(0.5),
            rwr_size: p.rwr_size.unwrap_or(4),
            seed: p.seed.unwrap_or(0),
            gcn_layers: p.gcn_layers.unwrap_or(1),
            normalize_infonce_rows: p.normalize_infonce_rows.unwrap_or(false),
            mask_anchor: p.mask_anchor.unwrap_or(false),
            score_contrast_mode: p.score_contrast_mode.unwrap_or_default(),
            stage2_views: p.stage2_views.unwrap_or_default(),
            score_view: p.score_view.unwrap_or_default(),
            stratify_mode: p.stratify_mode.unwrap_or_default(),
            disable_np: p.disable_np.unwrap_or(false),
            disable_nc: p.disable_nc.unwrap_or(false),
            disable_intra: p.disable_intra.unwrap_or(false),
            disable_inter: p.disable_inter.unwrap_or(false),
        }
    }

    /// Parses a JSON object. Unknown keys are rejected; missing keys take
    /// defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let partial: PartialConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg = RunConfig::resolve(partial);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.d == 0 {
            return fail("d must be positive");
        }
        if self.r == 0 {
            return fail("r must be positive");
        }
        if self.w == 0 {
            return fail("w must be positive");
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return fail("tau must be positive");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return fail("alpha must be non-negative");
        }
        if self.k_threshold == 0 {
            return fail("k_threshold must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if self.epochs == 0 {
            if self.stage_switch_epoch != 0 {
                return fail("stage_switch_epoch must be 0 when epochs is 0");
            }
        } else if self.stage_switch_epoch < 1 || self.stage_switch_epoch > self.epochs {
            return fail("stage_switch_epoch must lie in 1..=epochs");
        }
        if !(self.restart_prob > 0.0 && self.restart_prob < 1.0) {
            return fail("restart_prob must lie in (0, 1)");
        }
        if self.rwr_size == 0 {
            return fail("rwr_size must be positive");
        }
        if self.gcn_layers == 0 {
            return fail("gcn_layers must be positive");
        }
        if self.mask_anchor && self.gcn_layers != 1 {
            return fail("mask_anchor needs gcn_layers = 1");
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!((c.d, c.r, c.w), (64, 256, 5));
        assert_eq!(c.tau, 0.07);
        assert_eq!(c.alpha, 0.2);
        assert_eq!(c.k_threshold, 6);
        assert_eq!(c.learning_rate, 1e-3);
        assert_eq!(c.stage_switch_epoch, c.epochs / 2);
        assert!(!c.disable_np && !c.disable_nc && !c.disable_intra && !c.disable_inter);
    }

    #[test]
    fn dataset_selects_schedule() {
        let c = RunConfig::from_json(r#"{"dataset": "Cora"}"#).unwrap();
        assert_eq!(c.learning_rate, 5e-3);
        assert_eq!(c.epochs, 200);
        assert_eq!(c.stage_switch_epoch, 100);
        let t = RunConfig::for_dataset("tolokers");
        assert_eq!((t.learning_rate, t.epochs), (4e-2, 300));
        let c = RunConfig::from_json(r#"{"learning_rate": 0.005}"#).unwrap();
        assert_eq!(c.learning_rate, 5e-3);
    }

    #[test]
    fn rejects_bad_values_and_unknown_keys() {
        for text in [
            r#"{"tau": 0}"#,
            r#"{"alpha": -0.1}"#,
            r#"{"epochs": 10, "stage_switch_epoch": 11}"#,
            r#"{"restart_prob": 1.0}"#,
            r#"{"k_threshold": 0}"#,
            r#"{"learning_rte": 0.1}"#,
            r#"{"score_view": "pruned"}"#,
            "[1, 2]",
        ] {
            assert!(
                matches!(RunConfig::from_json(text), Err(Error::Config(_))),
                "{text} should fail"
            );
        }
    }

    #[test]
    fn resolved_dump_reloads_identically() {
        let c = RunConfig::from_json(r#"{"dataset": "citeseer", "seed": 9, "stage2_views": "completion_plus_pruned"}"#)
            .unwrap();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }
}

//! Ranking metrics and the degree-stratified evaluation report.

use std::cmp::Ordering;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::StratifyMode;
use crate::error::{Error, Result};
use crate::graph::DegreePartition;

fn check_inputs(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Input(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Input("scores contain NaN".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "need both classes, got {pos} positive and {neg} negative"
        )));
    }
    Ok((pos, neg))
}

fn ascending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));
    idx
}

/// Area under the ROC curve as the Mann–Whitney statistic, ties counted
/// one half, via midranks.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = check_inputs(scores, labels)?;
    let order = ascending(scores);
    // Twice the rank sum keeps midranks integral.
    let mut twice_rank_sum: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Ranks start+1..=end share the midrank (start + 1 + end) / 2.
        let twice_mid = (start + 1 + end) as u64;
        let group_pos = order[start..end].iter().filter(|&&i| labels[i]).count() as u64;
        twice_rank_sum += twice_mid * group_pos;
        start = end;
    }
    let (p, q) = (pos as u64, neg as u64);
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(twice_u as f64 / (2 * p * q) as f64)
}

/// Area under the precision–recall curve (trapezoidal, anchored at
/// recall 0 with precision 1) and average precision (step sum).
pub fn auprc_ap(scores: &[f64], labels: &[bool]) -> Result<(f64, f64)> {
    let (pos, _) = check_inputs(scores, labels)?;
    let mut order = ascending(scores);
    order.reverse();
    let total = pos as f64;
    let (mut tp, mut fp) = (0usize, 0usize);
    let (mut prev_recall, mut prev_precision) = (0.0, 1.0);
    let (mut area, mut ap) = (0.0, 0.0);
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        for &i in &order[start..end] {
            if labels[i] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        let recall = tp as f64 / total;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * (precision + prev_precision) / 2.0;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        prev_precision = precision;
        start = end;
    }
    Ok((area, ap))
}

/// Ordinary least-squares slope of `y` on `x`; `None` with fewer than two
/// distinct `x` values.
pub fn ols_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreePoint {
    pub degree: usize,
    pub auc: f64,
    pub count: usize,
}

/// Overall, tail and head metrics plus the per-degree AUC diagnostic.
/// Metrics that are undefined for their node set are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub auc: Option<f64>,
    pub auprc: Option<f64>,
    pub ap: Option<f64>,
    pub tail_auc: Option<f64>,
    pub head_auc: Option<f64>,
    pub tail_auprc: Option<f64>,
    pub head_auprc: Option<f64>,
    pub tail_ap: Option<f64>,
    pub head_ap: Option<f64>,
    pub degree_auc_points: Vec<DegreePoint>,
    pub regression_slope: Option<f64>,
    pub n_rounds: Option<usize>,
    pub k_threshold: usize,
    pub stratify_mode: StratifyMode,
}

fn defined<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedMetric(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn subset(scores: &[f64], labels: &[bool], keep: impl Fn(usize) -> bool) -> (Vec<f64>, Vec<bool>) {
    (0..scores.len()).filter(|&i| keep(i)).map(|i| (scores[i], labels[i])).unzip()
}

/// Metrics restricted to one degree stratum. Under `StratumVsAllNormals`
/// the stratum's anomalies are ranked against every normal node.
fn stratum_metrics(
    scores: &[f64],
    labels: &[bool],
    in_stratum: impl Fn(usize) -> bool,
    mode: StratifyMode,
) -> Result<(Option<f64>, Option<f64>, Option<f64>)> {
    let (s, l) = match mode {
        StratifyMode::WithinStratum => subset(scores, labels, in_stratum),
        StratifyMode::StratumVsAllNormals => subset(scores, labels, |i| !labels[i] || in_stratum(i)),
    };
    let auc = defined(roc_auc(&s, &l))?;
    let pr = defined(auprc_ap(&s, &l))?;
    Ok((auc, pr.map(|p| p.0), pr.map(|p| p.1)))
}

pub fn stratified_eval(
    scores: &[f64],
    labels: &[bool],
    partition: &DegreePartition,
    degrees: &[usize],
    mode: StratifyMode,
) -> Result<EvalReport> {
    if degrees.len() != scores.len() {
        return Err(Error::Input(format!(
            "{} degrees for {} scores",
            degrees.len(),
            scores.len()
        )));
    }
    let auc = defined(roc_auc(scores, labels))?;
    let pr = defined(auprc_ap(scores, labels))?;
    let (tail_auc, tail_auprc, tail_ap) = stratum_metrics(scores, labels, |i| partition.is_tail(i), mode)?;
    let (head_auc, head_auprc, head_ap) = stratum_metrics(scores, labels, |i| partition.is_head(i), mode)?;

    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(); max_degree + 1];
    for (i, &d) in degrees.iter().enumerate() {
        by_degree[d].push(i);
    }
    let mut degree_auc_points = Vec::new();
    for (degree, nodes) in by_degree.iter().enumerate() {
        let s: Vec<f64> = nodes.iter().map(|&i| scores[i]).collect();
        let l: Vec<bool> = nodes.iter().map(|&i| labels[i]).collect();
        if let Some(a) = defined(roc_auc(&s, &l))? {
            degree_auc_points.push(DegreePoint {
                degree,
                auc: a,
                count: nodes.len(),
            });
        }
    }
    let xy: Vec<(f64, f64)> = degree_auc_points.iter().map(|p| (p.degree as f64, p.auc)).collect();
    let regression_slope = ols_slope(&xy);
    if auc.is_none() {
        log::warn!("labels hold a single class; metrics are undefined");
    }
    Ok(EvalReport {
        auc,
        auprc: pr.map(|p| p.0),
        ap: pr.map(|p| p.1),
        tail_auc,
        head_auc,
        tail_auprc,
        head_auprc,
        tail_ap,
        head_ap,
        degree_auc_points,
        regression_slope,
        n_rounds: None,
        k_threshold: partition.k_threshold(),
        stratify_mode: mode,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    /// `degree,auc,count` rows.
    pub fn write_degree_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("degree,auc,count\n");
        for p in &self.degree_auc_points {
            out.push_str(&format!("{},{:.17e},{}\n", p.degree, p.auc, p.count));
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

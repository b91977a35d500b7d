//! Intra-view BCE, inter-view InfoNCE, and their exact gradients.

use ndarray::{Array1, Array2, Axis, Zip};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, ScoreContrastMode};
use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::model::{FeatureMatrix, ForwardTrace, ModelParams};

/// Loss components of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub intra_v1: f64,
    pub intra_v2: f64,
    pub inter_feat: f64,
    pub inter_score: f64,
    pub total: f64,
    pub alpha: f64,
}

impl LossBreakdown {
    pub fn from_parts(intra_v1: f64, intra_v2: f64, inter_feat: f64, inter_score: f64, alpha: f64) -> Self {
        LossBreakdown {
            intra_v1,
            intra_v2,
            inter_feat,
            inter_score,
            total: intra_v1 + intra_v2 + alpha * (inter_feat + inter_score),
            alpha,
        }
    }

    pub fn intra(&self) -> f64 {
        self.intra_v1 + self.intra_v2
    }

    pub fn inter(&self) -> f64 {
        self.inter_feat + self.inter_score
    }
}

/// `∂L/∂W` for every parameter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub gcn: Vec<Array2<f64>>,
    pub bilinear: Array2<f64>,
}

impl GradientSet {
    pub fn zeros_like(params: &ModelParams) -> Self {
        GradientSet {
            gcn: params.gcn.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            bilinear: Array2::zeros(params.bilinear.raw_dim()),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.gcn.iter().chain([&self.bilinear]).all(|g| g.iter().all(|x| x.is_finite()))
    }
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `−(1/2n) Σ [log s_p + log(1 − s_n)]` from scores.
pub fn bce_from_scores(pos: &[f64], neg: &[f64]) -> f64 {
    let n = pos.len();
    let sum: f64 = pos.iter().zip(neg).map(|(p, q)| p.ln() + (1.0 - q).ln()).sum();
    -sum / (2.0 * n as f64)
}

/// Intra-view BCE of one trace, evaluated on logits so that saturated
/// scores stay finite.
pub fn intra_loss(trace: &ForwardTrace) -> f64 {
    let n = trace.n();
    let sum: f64 = trace
        .pos_logits
        .iter()
        .zip(&trace.neg_logits)
        .map(|(&a, &b)| softplus(-a) + softplus(b))
        .sum();
    sum / (2.0 * n as f64)
}

/// Row-wise softmax of `Q Kᵀ / τ` and the InfoNCE value.
fn softmax_logits(q: &Array2<f64>, k: &Array2<f64>, tau: f64) -> Result<(f64, Array2<f64>)> {
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::Parameter(format!("temperature must be positive, got {tau}")));
    }
    if q.dim() != k.dim() {
        return Err(Error::Contract(format!(
            "contrast matrices differ in shape: {:?} vs {:?}",
            q.dim(),
            k.dim()
        )));
    }
    let mut p = q.dot(&k.t());
    let losses: Vec<f64> = p
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.mapv_inplace(|v| v / tau);
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let diag = row[i];
            let mut z = 0.0;
            row.mapv_inplace(|v| {
                let e = (v - max).exp();
                z += e;
                e
            });
            row.mapv_inplace(|e| e / z);
            max + z.ln() - diag
        })
        .collect();
    Ok((losses.iter().sum(), p))
}

/// `−Σ_i log softmax_i(q_i·k_j/τ)[i]`.
pub fn infonce(q: &Array2<f64>, k: &Array2<f64>, tau: f64) -> Result<f64> {
    softmax_logits(q, k, tau).map(|(loss, _)| loss)
}

/// InfoNCE value with `∂/∂Q` and `∂/∂K`.
pub fn infonce_with_grad(q: &Array2<f64>, k: &Array2<f64>, tau: f64) -> Result<(f64, Array2<f64>, Array2<f64>)> {
    let (loss, mut g) = softmax_logits(q, k, tau)?;
    for i in 0..g.nrows() {
        g[[i, i]] -= 1.0;
    }
    g /= tau;
    let dq = g.dot(k);
    let dk = g.t().dot(q);
    Ok((loss, dq, dk))
}

fn normalize_rows(m: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
    let norms = m.map_axis(Axis(1), |r| r.dot(&r).sqrt());
    let mut out = m.clone();
    for (mut row, &nrm) in out.rows_mut().into_iter().zip(&norms) {
        if nrm > 0.0 {
            row /= nrm;
        }
    }
    (out, norms)
}

/// Pulls a gradient through row normalization: `(g − x̂(x̂·g)) / ‖x‖`.
fn normalize_rows_backward(unit: &Array2<f64>, norms: &Array1<f64>, grad: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(grad.raw_dim());
    for i in 0..grad.nrows() {
        if norms[i] > 0.0 {
            let u = unit.row(i);
            let g = grad.row(i);
            let proj = u.dot(&g);
            let mut o = out.row_mut(i);
            o.assign(&g);
            o.scaled_add(-proj, &u);
            o /= norms[i];
        }
    }
    out
}

/// InfoNCE under the configured row treatment.
fn contrast(q: &Array2<f64>, k: &Array2<f64>, tau: f64, normalize: bool) -> Result<(f64, Array2<f64>, Array2<f64>)> {
    if !normalize {
        return infonce_with_grad(q, k, tau);
    }
    let (qn, qs) = normalize_rows(q);
    let (kn, ks) = normalize_rows(k);
    let (loss, dqn, dkn) = infonce_with_grad(&qn, &kn, tau)?;
    Ok((
        loss,
        normalize_rows_backward(&qn, &qs, &dqn),
        normalize_rows_backward(&kn, &ks, &dkn),
    ))
}

/// Per-node score vectors `[s_p, s_n]`, or `[s_p]` alone.
pub fn score_matrix(trace: &ForwardTrace, mode: ScoreContrastMode) -> Array2<f64> {
    let n = trace.n();
    match mode {
        ScoreContrastMode::PosOnly => trace.pos_scores.clone().into_shape_with_order((n, 1)).expect("column"),
        ScoreContrastMode::PosNeg => {
            let mut s = Array2::zeros((n, 2));
            s.column_mut(0).assign(&trace.pos_scores);
            s.column_mut(1).assign(&trace.neg_scores);
            s
        }
    }
}

fn check_pair(traces: [&ForwardTrace; 2]) -> Result<()> {
    if traces[0].n() != traces[1].n() {
        return Err(Error::Contract("views cover different node sets".into()));
    }
    Ok(())
}

/// `ctr(H¹, H²) + ctr(S¹, S²)`, returned as its two parts.
pub fn inter_loss(traces: [&ForwardTrace; 2], config: &RunConfig) -> Result<(f64, f64)> {
    check_pair(traces)?;
    let contrast_value = |q: &Array2<f64>, k: &Array2<f64>| {
        if config.normalize_infonce_rows {
            infonce(&normalize_rows(q).0, &normalize_rows(k).0, config.tau)
        } else {
            infonce(q, k, config.tau)
        }
    };
    let feat = contrast_value(traces[0].embeddings(), traces[1].embeddings())?;
    let score = contrast_value(
        &score_matrix(traces[0], config.score_contrast_mode),
        &score_matrix(traces[1], config.score_contrast_mode),
    )?;
    Ok((feat, score))
}

/// Loss components with ablated terms zeroed.
pub fn total_loss(traces: [&ForwardTrace; 2], config: &RunConfig) -> Result<LossBreakdown> {
    check_pair(traces)?;
    let (v1, v2) = if config.disable_intra {
        (0.0, 0.0)
    } else {
        (intra_loss(traces[0]), intra_loss(traces[1]))
    };
    let (feat, score) = if config.disable_inter {
        (0.0, 0.0)
    } else {
        inter_loss(traces, config)?
    };
    Ok(LossBreakdown::from_parts(v1, v2, feat, score, config.alpha))
}

/// Upstream gradients of one view before they enter the network.
struct ViewGrads {
    embeddings: Array2<f64>,
    pos_logits: Array1<f64>,
    neg_logits: Array1<f64>,
}

fn sigmoid_prime(s: f64) -> f64 {
    s * (1.0 - s)
}

/// Loss and exact gradients for a pair of views. `adjs` are the
/// normalized adjacencies the traces were computed on, `x` the shared
/// input features.
pub fn backward(
    traces: [&ForwardTrace; 2],
    adjs: [&NormalizedAdjacency; 2],
    x: &FeatureMatrix,
    params: &ModelParams,
    config: &RunConfig,
) -> Result<(LossBreakdown, GradientSet)> {
    check_pair(traces)?;
    let n = traces[0].n();
    let d = params.hidden_dim();
    let mut upstream: Vec<ViewGrads> = traces
        .iter()
        .map(|_| ViewGrads {
            embeddings: Array2::zeros((n, d)),
            pos_logits: Array1::zeros(n),
            neg_logits: Array1::zeros(n),
        })
        .collect();

    let mut intra = [0.0; 2];
    if !config.disable_intra {
        let scale = 1.0 / (2.0 * n as f64);
        for (v, t) in traces.iter().enumerate() {
            intra[v] = intra_loss(t);
            Zip::from(&mut upstream[v].pos_logits)
                .and(&t.pos_scores)
                .for_each(|g, &s| *g += -(1.0 - s) * scale);
            Zip::from(&mut upstream[v].neg_logits)
                .and(&t.neg_scores)
                .for_each(|g, &s| *g += s * scale);
        }
    }

    let (mut feat, mut score) = (0.0, 0.0);
    if !config.disable_inter {
        let alpha = config.alpha;
        let (loss, dh1, dh2) = contrast(
            traces[0].embeddings(),
            traces[1].embeddings(),
            config.tau,
            config.normalize_infonce_rows,
        )?;
        feat = loss;
        upstream[0].embeddings.scaled_add(alpha, &dh1);
        upstream[1].embeddings.scaled_add(alpha, &dh2);

        let mode = config.score_contrast_mode;
        let (loss, ds1, ds2) = contrast(
            &score_matrix(traces[0], mode),
            &score_matrix(traces[1], mode),
            config.tau,
            config.normalize_infonce_rows,
        )?;
        score = loss;
        for (v, ds) in [ds1, ds2].iter().enumerate() {
            let t = traces[v];
            for i in 0..n {
                upstream[v].pos_logits[i] += alpha * ds[[i, 0]] * sigmoid_prime(t.pos_scores[i]);
                if mode == ScoreContrastMode::PosNeg {
                    upstream[v].neg_logits[i] += alpha * ds[[i, 1]] * sigmoid_prime(t.neg_scores[i]);
                }
            }
        }
    }

    let mut grads = GradientSet::zeros_like(params);
    for (v, up) in upstream.into_iter().enumerate() {
        view_backward(traces[v], adjs[v], x, params, up, &mut grads);
    }
    let breakdown = LossBreakdown::from_parts(intra[0], intra[1], feat, score, config.alpha);
    if !grads.all_finite() {
        return Err(Error::NonFinite("gradient contains non-finite entries".into()));
    }
    Ok((breakdown, grads))
}

/// Chains one view's upstream gradients through the discriminator, the
/// readout and the encoder, accumulating into `grads`.
fn view_backward(
    trace: &ForwardTrace,
    adj: &NormalizedAdjacency,
    x: &FeatureMatrix,
    params: &ModelParams,
    up: ViewGrads,
    grads: &mut GradientSet,
) {
    let h = trace.embeddings();
    let readouts = &trace.neighbor_reprs;
    let neg = &trace.sampling.neg_nodes;
    let (n, d) = h.dim();

    // a_i = r_i W h_iᵀ, b_i = r_{neg(i)} W h_iᵀ.
    // P_i = ga_i r_i + gb_i r_{neg(i)}; ∂L/∂W = Pᵀ H, ∂L/∂h_i = (P W)_i.
    let mut p = Array2::zeros((n, d));
    for i in 0..n {
        let mut row = p.row_mut(i);
        row.scaled_add(up.pos_logits[i], &readouts.row(i));
        row.scaled_add(up.neg_logits[i], &readouts.row(neg[i]));
    }
    grads.bilinear += &p.t().dot(h);
    let mut dh = up.embeddings;
    dh += &p.dot(&params.bilinear);

    // ∂a_i/∂r_i = u_i with u_i = W h_iᵀ, likewise for the negative readout.
    let u = h.dot(&params.bilinear.t());
    let mut dr = Array2::zeros((n, d));
    for i in 0..n {
        dr.row_mut(i).scaled_add(up.pos_logits[i], &u.row(i));
        dr.row_mut(neg[i]).scaled_add(up.neg_logits[i], &u.row(i));
    }
    // Masked readouts bypass the encoder's ReLU: each member contributes
    // to dZ_j directly and to the owner's (XW)_k through −Â_jk.
    let mut dz_mask = None;
    let mut dt_mask = None;
    if trace.mask_anchor {
        let z = &trace.encoder.pre_activations[0];
        let t = &trace.encoder.first_product;
        let mut dz = Array2::zeros((n, d));
        let mut dt = Array2::zeros((n, d));
        for (k, set) in trace.sampling.pos_sets.iter().enumerate() {
            let share = 1.0 / set.len() as f64;
            for &j in set {
                let a = adj.weight(j, k).unwrap_or(0.0);
                for c in 0..d {
                    if z[[j, c]] - a * t[[k, c]] > 0.0 {
                        let g = share * dr[[k, c]];
                        dz[[j, c]] += g;
                        dt[[k, c]] -= a * g;
                    }
                }
            }
        }
        dz_mask = Some(dz);
        dt_mask = Some(dt);
    } else {
        for (k, set) in trace.sampling.pos_sets.iter().enumerate() {
            let share = 1.0 / set.len() as f64;
            for &j in set {
                dh.row_mut(j).scaled_add(share, &dr.row(k));
            }
        }
    }

    let layers = params.gcn.len();
    for l in (0..layers).rev() {
        let z = &trace.encoder.pre_activations[l];
        Zip::from(&mut dh).and(z).for_each(|g, &zv| {
            if zv <= 0.0 {
                *g = 0.0;
            }
        });
        if l == 0 {
            if let Some(extra) = &dz_mask {
                dh += extra;
            }
        }
        // Â is symmetric, so Âᵀ dZ = Â dZ.
        let mut dt = adj.matmul(&dh);
        if l == 0 {
            if let Some(extra) = &dt_mask {
                dt += extra;
            }
        }
        if l == 0 {
            grads.gcn[0] += &x.t_matmul(&dt);
        } else {
            let input = &trace.encoder.activations[l - 1];
            grads.gcn[l] += &input.t().dot(&dt);
            dh = dt.dot(&params.gcn[l].t());
        }
    }
}

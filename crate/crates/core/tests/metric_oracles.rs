use adgcl::config::StratifyMode;
use adgcl::graph::partition_by_degree;
use adgcl::metrics::{auprc_ap, roc_auc, stratified_eval};
use adgcl::sampling::rng_from_seed;
use adgcl::AttributedGraph;
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

fn pairwise_auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let (mut twice, mut pairs) = (0u64, 0u64);
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                twice += 2;
            } else if scores[i] == scores[j] {
                twice += 1;
            }
        }
    }
    (pairs > 0).then(|| twice as f64 / (2 * pairs) as f64)
}

/// Precision and recall at every distinct threshold, highest first.
fn exhaustive_pr(scores: &[f64], labels: &[bool]) -> (f64, f64) {
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let (mut r0, mut p0) = (0.0, 1.0);
    let (mut area, mut ap) = (0.0, 0.0);
    for t in thresholds {
        let tp = scores.iter().zip(labels).filter(|(s, l)| **s >= t && **l).count() as f64;
        let predicted = scores.iter().filter(|s| **s >= t).count() as f64;
        let (r, p) = (tp / pos, tp / predicted);
        area += (r - r0) * (p + p0) / 2.0;
        ap += (r - r0) * p;
        r0 = r;
        p0 = p;
    }
    (area, ap)
}

fn tied_instance(seed: u64) -> (Vec<f64>, Vec<bool>) {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(2..=500);
    let levels = rng.random_range(2..40);
    let rate = rng.random_range(0.05..0.6);
    let mut labels: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < rate).collect();
    labels[0] = true;
    labels[1] = false;
    let scores = (0..n)
        .map(|i| (rng.random_range(0..levels) as f64 + if labels[i] { 3.0 } else { 0.0 }) / 7.0)
        .collect();
    (scores, labels)
}

#[test]
fn auc_matches_pairwise_count_exactly() {
    for seed in 0..100 {
        let (s, l) = tied_instance(seed);
        assert_eq!(roc_auc(&s, &l).unwrap(), pairwise_auc(&s, &l).unwrap(), "seed {seed}");
    }
}

#[test]
fn pr_areas_match_threshold_sweep() {
    for seed in 0..100 {
        let (s, l) = tied_instance(seed);
        let (area, ap) = auprc_ap(&s, &l).unwrap();
        let (oa, oap) = exhaustive_pr(&s, &l);
        assert!((area - oa).abs() < 1e-12, "seed {seed}: {area} vs {oa}");
        assert!((ap - oap).abs() < 1e-12, "seed {seed}: {ap} vs {oap}");
    }
}

#[test]
fn stratified_auc_matches_pairwise_subsets() {
    for seed in 0..100 {
        let (s, l) = tied_instance(seed);
        let n = s.len();
        let mut rng = rng_from_seed(seed + 10_000);
        let edges: Vec<(usize, usize)> = (0..n * 2).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
        let g = AttributedGraph::from_edges(&edges, Array2::zeros((n, 1))).unwrap();
        let k = 3;
        let partition = partition_by_degree(&g, k).unwrap();
        let degrees = g.degrees();
        for mode in [StratifyMode::WithinStratum, StratifyMode::StratumVsAllNormals] {
            let report = stratified_eval(&s, &l, &partition, &degrees, mode).unwrap();
            for (tail, got) in [(true, report.tail_auc), (false, report.head_auc)] {
                let keep = |i: usize| {
                    let inside = (degrees[i] <= k) == tail;
                    match mode {
                        StratifyMode::WithinStratum => inside,
                        StratifyMode::StratumVsAllNormals => inside || !l[i],
                    }
                };
                let (ss, ll): (Vec<f64>, Vec<bool>) = (0..n).filter(|&i| keep(i)).map(|i| (s[i], l[i])).unzip();
                assert_eq!(got, pairwise_auc(&ss, &ll), "seed {seed} tail {tail} {mode:?}");
            }
            assert_eq!(report.auc, pairwise_auc(&s, &l));
        }
    }
}

proptest! {
    #[test]
    fn auc_is_invariant_to_monotone_maps(
        raw in prop::collection::vec((0u8..20, any::<bool>()), 2..120),
    ) {
        let scores: Vec<f64> = raw.iter().map(|r| r.0 as f64).collect();
        let labels: Vec<bool> = raw.iter().map(|r| r.1).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let mapped: Vec<f64> = scores.iter().map(|s| (0.3 * s).exp() - 4.0).collect();
        prop_assert_eq!(roc_auc(&scores, &labels).unwrap(), roc_auc(&mapped, &labels).unwrap());
    }

    #[test]
    fn negated_scores_complement_auc(
        labels in prop::collection::vec(any::<bool>(), 2..120),
        seed in any::<u64>(),
    ) {
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let mut rng = rng_from_seed(seed);
        let scores: Vec<f64> = labels.iter().map(|_| rng.random::<f64>()).collect();
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let total = roc_auc(&scores, &labels).unwrap() + roc_auc(&neg, &labels).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

use serde::{Deserialize, Serialize};

use super::EvalConfig;

/// Fraction of the first `k` scores above `s`. Missing entries count as negatives.
pub fn precision_at_k(scores: &[f64], k: usize, s: f64) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    let positives = scores.iter().take(k).filter(|&&v| v > s).count();
    positives as f64 / k as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApMetrics {
    pub thresholds: Vec<f64>,
    /// Mean Precision@k over `k = 1..=top_k`, per threshold.
    pub ap_s: Vec<f64>,
    pub ap: f64,
    /// Precision@1 per threshold.
    pub ap_s_top1: Vec<f64>,
    pub ap_top1: f64,
}

impl ApMetrics {
    pub fn zeros(thresholds: &[f64]) -> Self {
        ApMetrics {
            thresholds: thresholds.to_vec(),
            ap_s: vec![0.0; thresholds.len()],
            ap: 0.0,
            ap_s_top1: vec![0.0; thresholds.len()],
            ap_top1: 0.0,
        }
    }

    /// Element-wise mean of several metric sets sharing the same thresholds.
    pub fn mean(items: &[ApMetrics], thresholds: &[f64]) -> ApMetrics {
        let mut out = ApMetrics::zeros(thresholds);
        if items.is_empty() {
            return out;
        }
        let n = items.len() as f64;
        for m in items {
            for (acc, v) in out.ap_s.iter_mut().zip(&m.ap_s) {
                *acc += v;
            }
            for (acc, v) in out.ap_s_top1.iter_mut().zip(&m.ap_s_top1) {
                *acc += v;
            }
            out.ap += m.ap;
            out.ap_top1 += m.ap_top1;
        }
        out.ap_s.iter_mut().for_each(|v| *v /= n);
        out.ap_s_top1.iter_mut().for_each(|v| *v /= n);
        out.ap /= n;
        out.ap_top1 /= n;
        out
    }
}

/// AP metrics for post-NMS scores listed in rank order.
pub fn ap_metrics(scores: &[f64], config: &EvalConfig) -> ApMetrics {
    let mut ap_s = Vec::with_capacity(config.thresholds.len());
    let mut top1 = Vec::with_capacity(config.thresholds.len());
    for &s in &config.thresholds {
        let mut positives = 0usize;
        let mut sum = 0.0;
        for k in 1..=config.top_k {
            if scores.get(k - 1).is_some_and(|&v| v > s) {
                positives += 1;
            }
            sum += positives as f64 / k as f64;
        }
        ap_s.push(sum / config.top_k as f64);
        top1.push(precision_at_k(scores, 1, s));
    }
    let n = config.thresholds.len() as f64;
    ApMetrics {
        thresholds: config.thresholds.clone(),
        ap: ap_s.iter().sum::<f64>() / n,
        ap_top1: top1.iter().sum::<f64>() / n,
        ap_s,
        ap_s_top1: top1,
    }
}

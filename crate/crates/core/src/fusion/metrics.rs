use alloc::vec::Vec;

use crate::error::{ensure, Result};

/// Threshold metrics, ROC-AUC and the loss of one evaluation pass.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub loss: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub roc_auc: f64,
    pub samples: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

/// Area under the ROC curve by the trapezoidal rule over every distinct
/// score. Tied scores form a single diagonal step. Returns 0.5 when only
/// one class is present.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    ensure!(scores.len() == labels.len(), "scores and labels differ in length");
    ensure!(scores.iter().all(|s| !s.is_nan()), "scores contain NaN");
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Ok(0.5);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (mut tp, mut fp) = (0usize, 0usize);
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let (tp0, fp0) = (tp, fp);
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area += (fp - fp0) as f64 * (tp + tp0) as f64 / 2.0;
    }
    Ok(area / (positives as f64 * negatives as f64))
}

/// Counts at `threshold`; a score equal to the threshold is class 0.
/// Precision with no predicted positives is 0.
pub fn classification_metrics(scores: &[f64], labels: &[u8], threshold: f64) -> Result<Metrics> {
    ensure!(!scores.is_empty(), "no samples to evaluate");
    let mut m = Metrics {
        samples: scores.len(),
        roc_auc: roc_auc(scores, labels)?,
        ..Metrics::default()
    };
    for (&s, &y) in scores.iter().zip(labels) {
        match (s > threshold, y == 1) {
            (true, true) => m.true_positives += 1,
            (true, false) => m.false_positives += 1,
            (false, false) => m.true_negatives += 1,
            (false, true) => m.false_negatives += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    m.accuracy = ratio(m.true_positives + m.true_negatives, m.samples);
    m.precision = ratio(m.true_positives, m.true_positives + m.false_positives);
    m.recall = ratio(m.true_positives, m.true_positives + m.false_negatives);
    Ok(m)
}

use serde::{Deserialize, Serialize};

use super::EvalError;

fn check(len: usize, labels: &[u8]) -> Result<(usize, usize), EvalError> {
    if len != labels.len() {
        return Err(EvalError::LengthMismatch(len, labels.len()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    Ok((neg, pos))
}

/// `(2 × favourable pairs, pairs)`: positives outscoring negatives count 2,
/// ties count 1. Integer-valued so sums over resamples stay exact.
pub fn auc_counts(scores: &[f64], labels: &[u8]) -> Result<(u64, u64), EvalError> {
    let (neg, pos) = check(scores.len(), labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut twice = 0u64;
    let mut below_neg = 0u64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut p, mut q) = (0u64, 0u64);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] == 1 {
                p += 1;
            } else {
                q += 1;
            }
            j += 1;
        }
        twice += 2 * p * below_neg + p * q;
        below_neg += q;
        i = j;
    }
    Ok((twice, (pos * neg) as u64))
}

/// Mann-Whitney AUC with ties counted one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64, EvalError> {
    let (twice, pairs) = auc_counts(scores, labels)?;
    Ok(twice as f64 / (2 * pairs) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Empirical ROC curve from the strictest threshold down, starting at (0, 0).
pub fn roc_points(scores: &[f64], labels: &[u8]) -> Result<Vec<RocPoint>, EvalError> {
    let (neg, pos) = check(scores.len(), labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut pts = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        pts.push(RocPoint {
            threshold: t,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(pts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub accuracy: f64,
    /// Recall of label 1.
    pub sensitivity: f64,
    /// Recall of label 0.
    pub specificity: f64,
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

pub fn confusion_metrics(pred: &[u8], labels: &[u8]) -> Result<Confusion, EvalError> {
    let (neg, pos) = check(pred.len(), labels)?;
    let tp = pred
        .iter()
        .zip(labels)
        .filter(|(&p, &l)| p == 1 && l == 1)
        .count();
    let tn = pred
        .iter()
        .zip(labels)
        .filter(|(&p, &l)| p == 0 && l == 0)
        .count();
    Ok(Confusion {
        accuracy: (tp + tn) as f64 / labels.len() as f64,
        sensitivity: tp as f64 / pos as f64,
        specificity: tn as f64 / neg as f64,
        tp,
        tn,
        fp: neg - tn,
        fn_: pos - tp,
    })
}

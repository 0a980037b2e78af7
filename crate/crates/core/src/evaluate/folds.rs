use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::rng::{stream, tag};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold split.
///
/// Each class is shuffled (label 0 first, then label 1, from one stream)
/// and dealt round-robin over the folds; dealing of label 1 continues from
/// the fold after the last label-0 row, so fold sizes differ by at most
/// one. Indices in each fold are ascending.
///
/// Every class needs at least `k` rows, except for leave-one-out (`k` equal
/// to the number of rows).
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Fold>, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidSpec(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    let n = labels.len();
    if k > n {
        return Err(EvalError::InvalidSpec(format!("{k} folds for {n} rows")));
    }
    let mut rng = stream(seed, tag::FOLDS, 0);
    let mut assignment = vec![0usize; n];
    let mut offset = 0;
    for label in [0u8, 1] {
        let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == label).collect();
        if idx.len() < k && k != n {
            return Err(EvalError::TooFewPerClass {
                label,
                count: idx.len(),
                k,
            });
        }
        idx.shuffle(&mut rng);
        for (j, &i) in idx.iter().enumerate() {
            assignment[i] = (offset + j) % k;
        }
        offset = (offset + idx.len()) % k;
    }
    Ok((0..k)
        .map(|f| Fold {
            train: (0..n).filter(|&i| assignment[i] != f).collect(),
            test: (0..n).filter(|&i| assignment[i] == f).collect(),
        })
        .collect())
}

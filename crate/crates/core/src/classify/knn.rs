use rayon::prelude::*;

use crate::features::FeatureMatrix;

/// k-nearest-neighbour vote; the score is the minority fraction among the
/// `k` nearest training rows (Euclidean, ties to the lower training index).
#[derive(Debug, Clone)]
pub struct Knn {
    k: usize,
    d: usize,
    data: Vec<f64>,
    labels: Vec<u8>,
}

impl Knn {
    pub fn fit(m: &FeatureMatrix, k: usize) -> Self {
        Knn {
            k: k.min(m.n_rows()),
            d: m.n_features(),
            data: m.values().to_vec(),
            labels: m.labels().to_vec(),
        }
    }

    pub fn score_row(&self, x: &[f64]) -> f64 {
        let k = self.k;
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for (i, row) in self.data.chunks_exact(self.d.max(1)).enumerate() {
            let dist: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.len() == k && dist >= best[k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|b| b.0 <= dist);
            best.insert(pos, (dist, i));
            best.truncate(k);
        }
        best.iter().filter(|b| self.labels[b.1] == 1).count() as f64 / k as f64
    }

    pub fn score(&self, m: &FeatureMatrix) -> Vec<f64> {
        (0..m.n_rows())
            .into_par_iter()
            .map(|i| self.score_row(m.row(i)))
            .collect()
    }
}

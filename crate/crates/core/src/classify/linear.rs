use rand::seq::SliceRandom;

use crate::features::FeatureMatrix;
use crate::rng::{stream, tag};

/// Linear soft-margin SVM trained by stochastic subgradient descent on
/// the L2-regularised hinge loss, over z-scored inputs. The score is the
/// signed margin.
#[derive(Debug, Clone)]
pub struct LinearSvm {
    mean: Vec<f64>,
    scale: Vec<f64>,
    w: Vec<f64>,
    b: f64,
}

impl LinearSvm {
    pub fn fit(m: &FeatureMatrix, c: f64, epochs: usize, learning_rate: f64, seed: u64) -> Self {
        let n = m.n_rows();
        let d = m.n_features();
        let mean: Vec<f64> = (0..d)
            .map(|j| m.rows().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let scale: Vec<f64> = (0..d)
            .map(|j| {
                let sd =
                    (m.rows().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n as f64).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        let z: Vec<Vec<f64>> = m
            .rows()
            .map(|r| (0..d).map(|j| (r[j] - mean[j]) / scale[j]).collect())
            .collect();
        let y: Vec<f64> = m
            .labels()
            .iter()
            .map(|&l| if l == 1 { 1.0 } else { -1.0 })
            .collect();
        let lambda = 1.0 / (c * n as f64);
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = stream(seed, tag::CLASSIFIER, 0);
        for epoch in 0..epochs {
            order.shuffle(&mut rng);
            let eta = learning_rate / (1.0 + epoch as f64);
            for &i in &order {
                let margin = y[i] * (dot(&w, &z[i]) + b);
                for wj in w.iter_mut() {
                    *wj -= eta * lambda * *wj;
                }
                if margin < 1.0 {
                    for (wj, xj) in w.iter_mut().zip(&z[i]) {
                        *wj += eta * y[i] * xj;
                    }
                    b += eta * y[i];
                }
            }
        }
        LinearSvm { mean, scale, w, b }
    }

    pub fn score_row(&self, x: &[f64]) -> f64 {
        self.b
            + (0..self.w.len())
                .map(|j| self.w[j] * (x[j] - self.mean[j]) / self.scale[j])
                .sum::<f64>()
    }

    pub fn score(&self, m: &FeatureMatrix) -> Vec<f64> {
        m.rows().map(|r| self.score_row(r)).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

use crate::features::FeatureMatrix;

/// Row vectors used for distance computations, optionally z-scored.
#[derive(Debug, Clone)]
pub struct DistanceSpace {
    data: Vec<f64>,
    d: usize,
}

impl DistanceSpace {
    pub fn new(m: &FeatureMatrix, standardize: bool) -> Self {
        let d = m.n_features();
        let mut data = m.values().to_vec();
        if standardize && m.n_rows() > 0 {
            let n = m.n_rows() as f64;
            for j in 0..d {
                let mean = m.rows().map(|r| r[j]).sum::<f64>() / n;
                let sd = (m.rows().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n).sqrt();
                let sd = if sd > 0.0 { sd } else { 1.0 };
                for i in 0..m.n_rows() {
                    data[i * d + j] = (data[i * d + j] - mean) / sd;
                }
            }
        }
        DistanceSpace { data, d }
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn dist2(&self, a: usize, b: usize) -> f64 {
        self.point(a)
            .iter()
            .zip(self.point(b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    }

    /// The `k` candidates nearest to `query` (itself excluded), nearest
    /// first; equal distances go to the lower row index.
    pub fn knn(&self, query: usize, candidates: &[usize], k: usize) -> Vec<usize> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for &c in candidates {
            if c == query {
                continue;
            }
            let d = self.dist2(query, c);
            if best.len() == k && !less(d, c, best[k - 1]) {
                continue;
            }
            let pos = best.partition_point(|&b| less(b.0, b.1, (d, c)));
            best.insert(pos, (d, c));
            best.truncate(k);
        }
        best.into_iter().map(|b| b.1).collect()
    }
}

fn less(d: f64, i: usize, other: (f64, usize)) -> bool {
    d < other.0 || (d == other.0 && i < other.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knn_breaks_ties_by_index() {
        let m = FeatureMatrix::new(
            vec![vec![0.0], vec![1.0], vec![-1.0], vec![2.0], vec![1.0]],
            vec!["x".into()],
            vec![0; 5],
            (0..5).map(|i| i.to_string()).collect(),
        )
        .unwrap();
        let s = DistanceSpace::new(&m, false);
        assert_eq!(s.knn(0, &[0, 1, 2, 3, 4], 3), vec![1, 2, 4]);
        assert_eq!(s.knn(4, &[0, 1, 2, 3, 4], 2), vec![1, 0]);
        assert_eq!(s.knn(0, &[3, 4, 2, 1], 2), vec![1, 2]);
    }
}

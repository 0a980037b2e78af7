use super::ClassifyError;
use crate::features::FeatureMatrix;

#[derive(Debug, Clone)]
struct Gaussian {
    mean: Vec<f64>,
    /// Lower-triangular Cholesky factor of the regularised covariance.
    chol: Vec<Vec<f64>>,
    log_det: f64,
    log_prior: f64,
}

impl Gaussian {
    fn fit(rows: &[&[f64]], n_total: usize, ridge: f64) -> Result<Self, ClassifyError> {
        let d = rows[0].len();
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let denom = (n - 1.0).max(1.0);
        let mut cov = vec![vec![0.0; d]; d];
        for r in rows {
            for a in 0..d {
                for b in 0..=a {
                    cov[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]) / denom;
                }
            }
        }
        let mean_diag = (0..d).map(|j| cov[j][j]).sum::<f64>() / d as f64;
        let eps = if mean_diag > 0.0 {
            ridge * mean_diag
        } else {
            ridge.max(1e-12)
        };
        for (j, row) in cov.iter_mut().enumerate() {
            row[j] += eps;
        }
        let chol = cholesky(&cov).ok_or_else(|| {
            ClassifyError::NumericalFailure("covariance is not positive definite".into())
        })?;
        let log_det = 2.0 * (0..d).map(|j| chol[j][j].ln()).sum::<f64>();
        Ok(Gaussian {
            mean,
            chol,
            log_det,
            log_prior: (n / n_total as f64).ln(),
        })
    }

    /// log prior + log density, without the shared constant.
    fn log_joint(&self, x: &[f64]) -> f64 {
        let d = self.mean.len();
        let mut z = vec![0.0; d];
        for i in 0..d {
            let s: f64 = (0..i).map(|j| self.chol[i][j] * z[j]).sum();
            z[i] = (x[i] - self.mean[i] - s) / self.chol[i][i];
        }
        let mahal: f64 = z.iter().map(|v| v * v).sum();
        self.log_prior - 0.5 * self.log_det - 0.5 * mahal
    }
}

/// Lower-triangular `L` with `L Lᵀ = a`, reading only the lower triangle.
fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let d = a.len();
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = a[i][i] - s;
                if !(v > 0.0) {
                    return None;
                }
                l[i][i] = v.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Quadratic discriminant; the score is the log-posterior difference
/// `log P(1|x) - log P(0|x)`.
#[derive(Debug, Clone)]
pub struct Qda {
    classes: [Gaussian; 2],
}

impl Qda {
    pub fn fit(m: &FeatureMatrix, ridge: f64) -> Result<Self, ClassifyError> {
        let split = |label: u8| -> Vec<&[f64]> {
            (0..m.n_rows())
                .filter(|&i| m.labels()[i] == label)
                .map(|i| m.row(i))
                .collect()
        };
        let n = m.n_rows();
        Ok(Qda {
            classes: [
                Gaussian::fit(&split(0), n, ridge)?,
                Gaussian::fit(&split(1), n, ridge)?,
            ],
        })
    }

    pub fn score_row(&self, x: &[f64]) -> f64 {
        self.classes[1].log_joint(x) - self.classes[0].log_joint(x)
    }

    pub fn score(&self, m: &FeatureMatrix) -> Vec<f64> {
        m.rows().map(|r| self.score_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        let a = vec![
            vec![4.0, 0.0, 0.0],
            vec![2.0, 5.0, 0.0],
            vec![-2.0, 1.0, 6.0],
        ];
        let l = cholesky(&a).unwrap();
        for i in 0..3 {
            for j in 0..=i {
                let v: f64 = (0..3).map(|k| l[i][k] * l[j][k]).sum();
                assert!((v - a[i][j]).abs() < 1e-12);
            }
        }
        assert!(cholesky(&[vec![-1.0]]).is_none());
    }

    #[test]
    fn boundary_points_score_zero() {
        // Mirror-symmetric classes with equal priors: the plane x0 = 0 is the boundary.
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (a, b) in [(1.0, 0.3), (2.0, -0.4), (1.5, 1.1), (3.0, 0.2), (2.2, -1.0)] {
            rows.push(vec![a, b]);
            rows.push(vec![-a, b]);
            labels.extend([1, 0]);
        }
        let ids = (0..rows.len()).map(|i| format!("{i}")).collect();
        let m = FeatureMatrix::new(rows, vec!["a".into(), "b".into()], labels, ids).unwrap();
        let q = Qda::fit(&m, 1e-6).unwrap();
        for y in [-3.0, 0.0, 0.7, 12.0] {
            assert!(q.score_row(&[0.0, y]).abs() < 1e-9);
        }
        assert!(q.score_row(&[2.0, 0.0]) > 0.0);
    }
}

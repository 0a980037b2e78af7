use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::auc_counts;
use super::EvalError;
use crate::features::FeatureMatrix;
use crate::rng::{stream, tag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapAuc {
    pub mean_auc: f64,
    /// Population standard deviation over iterations.
    pub std_auc: f64,
    /// `|mean_auc - 0.5|`, computed from exact pair counts so that a
    /// feature and its negation get identical keys.
    pub distance: f64,
}

/// Single-feature AUC over `n_boot` stratified resamples (class counts
/// preserved). Iteration `b` uses its own stream, so every feature scored
/// with the same seed sees the same resamples.
pub fn bootstrap_feature_auc(
    values: &[f64],
    labels: &[u8],
    n_boot: usize,
    seed: u64,
) -> Result<BootstrapAuc, EvalError> {
    if values.len() != labels.len() {
        return Err(EvalError::LengthMismatch(values.len(), labels.len()));
    }
    if n_boot == 0 {
        return Err(EvalError::InvalidSpec("n_boot must be >= 1".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::InvalidSpec(
            "feature values must be finite".into(),
        ));
    }
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(EvalError::SingleClass);
    }
    let mut resample_labels = vec![0u8; neg.len()];
    resample_labels.extend(std::iter::repeat_n(1u8, pos.len()));
    let counts: Vec<u64> = (0..n_boot)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(labels.len()),
            |scores: &mut Vec<f64>, b| {
                let mut rng = stream(seed, tag::BOOTSTRAP, b as u64);
                scores.clear();
                scores.extend((0..neg.len()).map(|_| values[neg[rng.random_range(0..neg.len())]]));
                scores.extend((0..pos.len()).map(|_| values[pos[rng.random_range(0..pos.len())]]));
                auc_counts(scores, &resample_labels)
                    .expect("both classes present")
                    .0
            },
        )
        .collect();
    let pairs = (pos.len() * neg.len()) as f64;
    let aucs: Vec<f64> = counts.iter().map(|&t| t as f64 / (2.0 * pairs)).collect();
    let total: u128 = counts.iter().map(|&t| u128::from(t)).sum();
    let denom = 2.0 * pairs * n_boot as f64;
    let mean_auc = total as f64 / denom;
    let half = (pos.len() * neg.len()) as u128 * n_boot as u128;
    let distance = total.abs_diff(half) as f64 / denom;
    let std_auc = (aucs.iter().map(|a| (a - mean_auc).powi(2)).sum::<f64>() / n_boot as f64).sqrt();
    Ok(BootstrapAuc {
        mean_auc,
        std_auc,
        distance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub feature: String,
    pub mean_auc: f64,
    pub std_auc: f64,
    pub distance: f64,
}

/// Features ordered by decreasing `|mean AUC - 0.5|`, ties by name.
pub fn rank_features(
    m: &FeatureMatrix,
    n_boot: usize,
    seed: u64,
) -> Result<Vec<RankedFeature>, EvalError> {
    let mut out = (0..m.n_features())
        .map(|j| {
            let b = bootstrap_feature_auc(&m.column(j), m.labels(), n_boot, seed)?;
            Ok(RankedFeature {
                feature: m.feature_names()[j].clone(),
                mean_auc: b.mean_auc,
                std_auc: b.std_auc,
                distance: b.distance,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    out.sort_by(|a, b| {
        b.distance
            .total_cmp(&a.distance)
            .then_with(|| a.feature.cmp(&b.feature))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_feature() {
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 4 == 0)).collect();
        let values: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
        let b = bootstrap_feature_auc(&values, &labels, 200, 1).unwrap();
        assert_eq!((b.mean_auc, b.std_auc, b.distance), (1.0, 0.0, 0.5));
    }

    #[test]
    fn negation_ties_and_order() {
        let labels: Vec<u8> = (0..60).map(|i| u8::from(i % 3 == 0)).collect();
        let f: Vec<f64> = (0..60)
            .map(|i| ((i * 17) % 23) as f64 + if i % 3 == 0 { 6.0 } else { 0.0 })
            .collect();
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let copy: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![f[i], neg[i], copy[i]]).collect();
        let m = FeatureMatrix::new(
            rows,
            vec!["f".into(), "minus_f".into(), "copy".into()],
            labels,
            (0..60).map(|i| i.to_string()).collect(),
        )
        .unwrap();
        let r = rank_features(&m, 300, 9).unwrap();
        assert_eq!(r[0].feature, "copy");
        assert_eq!(r[1].distance, r[2].distance);
        assert_eq!(
            (r[1].feature.as_str(), r[2].feature.as_str()),
            ("f", "minus_f")
        );
        assert!((r[1].mean_auc + r[2].mean_auc - 1.0).abs() < 1e-12);
    }
}

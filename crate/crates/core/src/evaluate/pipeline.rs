use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{auc, confusion_metrics, roc_points, RocPoint};
use super::{stratified_kfold, EvalError, MeanStd};
use crate::classify::{fit, predict, score, ClassifierSpec};
use crate::features::FeatureMatrix;
use crate::oversample::{resample, Algorithm, SampledMatrix, SamplerConfig, SamplerWarning};
use crate::rng::{derive_seed, tag};

/// Where over-sampling happens relative to the fold split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// No over-sampling.
    #[default]
    None,
    /// Over-sample the whole matrix, then split (leaks; demonstration only).
    BeforeSplit,
    /// Over-sample each training partition after the split.
    AfterSplit,
}

impl Placement {
    pub fn as_str(self) -> &'static str {
        match self {
            Placement::None => "none",
            Placement::BeforeSplit => "before_split",
            Placement::AfterSplit => "after_split",
        }
    }
}

fn ten() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub classifier: ClassifierSpec,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default = "ten")]
    pub n_folds: usize,
    #[serde(default)]
    pub seed: u64,
    /// z-score columns with training-partition statistics before fitting.
    #[serde(default)]
    pub standardize: bool,
    /// Must be set for [`Placement::BeforeSplit`].
    #[serde(default)]
    pub allow_leakage: bool,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        PipelineSpec {
            sampler: SamplerConfig::default(),
            classifier: ClassifierSpec::default(),
            placement: Placement::None,
            n_folds: 10,
            seed: 0,
            standardize: false,
            allow_leakage: false,
        }
    }
}

impl PipelineSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.n_folds < 2 {
            return Err(EvalError::InvalidSpec(format!(
                "n_folds must be >= 2, got {}",
                self.n_folds
            )));
        }
        if self.placement == Placement::BeforeSplit && !self.allow_leakage {
            return Err(EvalError::LeakageNotAcknowledged);
        }
        self.sampler.validate()?;
        self.classifier.validate()?;
        Ok(())
    }

    /// Sampler configuration for one work unit, seeded from the pipeline seed.
    pub fn unit_sampler(&self, unit: u64) -> SamplerConfig {
        let base = derive_seed(self.seed, tag::SAMPLER, unit);
        self.sampler
            .clone()
            .with_seed(derive_seed(base, tag::SAMPLER, self.sampler.seed))
    }

    pub fn unit_classifier_seed(&self, unit: u64) -> u64 {
        derive_seed(self.seed, tag::CLASSIFIER, unit)
    }
}

/// Row-level bookkeeping of one fold, for audits; not serialized.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FoldAudit {
    /// Ids of the rows the classifier was fitted on.
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    /// Per test row: whether it is a generated row.
    pub test_synthetic: Vec<bool>,
    pub test_labels: Vec<u8>,
    pub test_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub auc: f64,
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    /// (label 0, label 1) rows used for fitting.
    pub train_counts: (usize, usize),
    pub test_counts: (usize, usize),
    pub synthetic_in_train: usize,
    pub synthetic_in_test: usize,
    pub warnings: Vec<SamplerWarning>,
    #[serde(skip)]
    pub audit: FoldAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub auc: MeanStd,
    pub accuracy: MeanStd,
    pub sensitivity: MeanStd,
    pub specificity: MeanStd,
}

impl Aggregate {
    pub fn of(folds: &[FoldReport]) -> Self {
        let col = |f: fn(&FoldReport) -> f64| MeanStd::of(&folds.iter().map(f).collect::<Vec<_>>());
        Aggregate {
            auc: col(|f| f.auc),
            accuracy: col(|f| f.accuracy),
            sensitivity: col(|f| f.sensitivity),
            specificity: col(|f| f.specificity),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub placement: Placement,
    pub spec: PipelineSpec,
    pub n_rows: usize,
    pub n_features: usize,
    /// Rows generated before the split (placement `before_split` only).
    pub synthetic_before_split: usize,
    pub per_fold: Vec<FoldReport>,
    pub aggregate: Aggregate,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl MetricsReport {
    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "placement {}  sampler {}  classifier {}  folds {}",
            self.placement.as_str(),
            self.spec.sampler.label(),
            self.spec.classifier.kind(),
            self.spec.n_folds
        );
        let _ = writeln!(
            s,
            "{:>4} {:>8} {:>8} {:>8} {:>8} {:>11} {:>11}",
            "fold", "auc", "acc", "sens", "spec", "train", "test"
        );
        for f in &self.per_fold {
            let _ = writeln!(
                s,
                "{:>4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>5}/{:<5} {:>5}/{:<5}",
                f.fold,
                f.auc,
                f.accuracy,
                f.sensitivity,
                f.specificity,
                f.train_counts.0,
                f.train_counts.1,
                f.test_counts.0,
                f.test_counts.1
            );
        }
        let a = &self.aggregate;
        let _ = writeln!(
            s,
            "mean {:>8.4} {:>8.4} {:>8.4} {:>8.4}\n std {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            a.auc.mean,
            a.accuracy.mean,
            a.sensitivity.mean,
            a.specificity.mean,
            a.auc.std,
            a.accuracy.std,
            a.sensitivity.std,
            a.specificity.std
        );
        s
    }

    /// ROC points of every fold.
    pub fn roc(&self) -> Result<Vec<(usize, RocPoint)>, EvalError> {
        let mut out = Vec::new();
        for f in &self.per_fold {
            out.extend(
                roc_points(&f.audit.test_scores, &f.audit.test_labels)?
                    .into_iter()
                    .map(|p| (f.fold, p)),
            );
        }
        Ok(out)
    }
}

fn standardize(train: &FeatureMatrix, test: &FeatureMatrix) -> (FeatureMatrix, FeatureMatrix) {
    let n = train.n_rows() as f64;
    let d = train.n_features();
    let mean: Vec<f64> = (0..d)
        .map(|j| train.rows().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let sd: Vec<f64> = (0..d)
        .map(|j| {
            let s = (train.rows().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let f = |j: usize, v: f64| (v - mean[j]) / sd[j];
    (train.map_values(f), test.map_values(f))
}

/// Fits on `train` and evaluates on `test`. Returns the fold report.
fn evaluate_fold(
    spec: &PipelineSpec,
    fold: usize,
    train: SampledMatrix,
    test: &FeatureMatrix,
    test_synthetic: Vec<bool>,
) -> Result<FoldReport, EvalError> {
    let synthetic_in_train = train.n_synthetic();
    let warnings = train.warnings.clone();
    let train = train.matrix.sorted_by_id();
    let (train, test_x) = if spec.standardize {
        standardize(&train, test)
    } else {
        (train, test.clone())
    };
    let model = fit(
        &spec.classifier,
        &train,
        spec.unit_classifier_seed(fold as u64),
    )?;
    let scores = score(&model, &test_x)?;
    let pred = predict(&model, &test_x, None)?;
    let c = confusion_metrics(&pred, test.labels())?;
    Ok(FoldReport {
        fold,
        auc: auc(&scores, test.labels())?,
        accuracy: c.accuracy,
        sensitivity: c.sensitivity,
        specificity: c.specificity,
        train_counts: train.class_counts(),
        test_counts: test.class_counts(),
        synthetic_in_train,
        synthetic_in_test: test_synthetic.iter().filter(|&&s| s).count(),
        warnings,
        audit: FoldAudit {
            train_ids: train.sample_ids().to_vec(),
            test_ids: test.sample_ids().to_vec(),
            test_synthetic,
            test_labels: test.labels().to_vec(),
            test_scores: scores,
        },
    })
}

/// Stratified k-fold cross-validation with the configured sampler placement.
/// Rows are put in sample-id order first so results do not depend on the
/// input order.
pub fn run_pipeline(m: &FeatureMatrix, spec: &PipelineSpec) -> Result<MetricsReport, EvalError> {
    let start = Instant::now();
    spec.validate()?;
    let m = m.sorted_by_id();
    if !m.has_both_classes() {
        return Err(EvalError::SingleClass);
    }
    let (data, mask) = match spec.placement {
        Placement::BeforeSplit => {
            let s = resample(&m, &spec.unit_sampler(u64::MAX))?;
            (s.matrix, s.synthetic_mask)
        }
        _ => (m.clone(), vec![false; m.n_rows()]),
    };
    let folds = stratified_kfold(data.labels(), spec.n_folds, spec.seed)?;
    let per_fold = folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let train = data.select_rows(&fold.train);
            let test = data.select_rows(&fold.test);
            let test_synthetic: Vec<bool> = fold.test.iter().map(|&i| mask[i]).collect();
            let train = match spec.placement {
                Placement::AfterSplit if spec.sampler.algorithm != Algorithm::None => {
                    resample(&train, &spec.unit_sampler(f as u64))?
                }
                Placement::BeforeSplit => {
                    let mut s = SampledMatrix::unchanged(&train);
                    s.synthetic_mask = fold.train.iter().map(|&i| mask[i]).collect();
                    s
                }
                _ => SampledMatrix::unchanged(&train),
            };
            evaluate_fold(spec, f, train, &test, test_synthetic)
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(MetricsReport {
        placement: spec.placement,
        spec: spec.clone(),
        n_rows: m.n_rows(),
        n_features: m.n_features(),
        synthetic_before_split: mask.iter().filter(|&&s| s).count(),
        aggregate: Aggregate::of(&per_fold),
        per_fold,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 5 == 0)).collect();
        FeatureMatrix::new(
            rows,
            vec!["a".into(), "b".into(), "c".into()],
            labels,
            (0..n).map(|i| format!("n{i:04}")).collect(),
        )
        .unwrap()
    }

    fn spec(placement: Placement) -> PipelineSpec {
        PipelineSpec {
            sampler: SamplerConfig::smote(1.0, 5),
            classifier: ClassifierSpec::knn(5),
            placement,
            n_folds: 5,
            seed: 3,
            standardize: false,
            allow_leakage: placement == Placement::BeforeSplit,
        }
    }

    #[test]
    fn before_split_needs_acknowledgement() {
        let s = PipelineSpec {
            allow_leakage: false,
            ..spec(Placement::BeforeSplit)
        };
        assert!(matches!(
            run_pipeline(&noise(100, 1), &s),
            Err(EvalError::LeakageNotAcknowledged)
        ));
    }

    #[test]
    fn after_split_keeps_test_folds_clean() {
        let m = noise(200, 2);
        let r = run_pipeline(&m, &spec(Placement::AfterSplit)).unwrap();
        assert_eq!(r.per_fold.len(), 5);
        for f in &r.per_fold {
            assert_eq!(f.synthetic_in_test, 0);
            assert!(f.synthetic_in_train > 0);
            assert!(f
                .audit
                .test_ids
                .iter()
                .all(|id| !f.audit.train_ids.contains(id)));
        }
        let total_test: usize = r.per_fold.iter().map(|f| f.audit.test_ids.len()).sum();
        assert_eq!(total_test, 200);
    }

    #[test]
    fn before_split_leaks_synthetics_into_test() {
        let r = run_pipeline(&noise(200, 3), &spec(Placement::BeforeSplit)).unwrap();
        assert_eq!(r.synthetic_before_split, 120);
        assert!(
            r.per_fold
                .iter()
                .map(|f| f.synthetic_in_test)
                .sum::<usize>()
                > 0
        );
    }

    #[test]
    fn input_order_does_not_matter() {
        let m = noise(150, 4);
        let rev: Vec<usize> = (0..150).rev().collect();
        let a = run_pipeline(&m, &spec(Placement::AfterSplit)).unwrap();
        let b = run_pipeline(&m.select_rows(&rev), &spec(Placement::AfterSplit)).unwrap();
        assert_eq!(a.per_fold, b.per_fold);
    }

    #[test]
    fn aggregate_is_recomputable_and_text_renders() {
        let r = run_pipeline(&noise(120, 5), &spec(Placement::None)).unwrap();
        let aucs: Vec<f64> = r.per_fold.iter().map(|f| f.auc).collect();
        assert_eq!(r.aggregate.auc, MeanStd::of(&aucs));
        assert!(r.to_text().contains("mean"));
        assert!(!r.roc().unwrap().is_empty());
        let json = serde_json::to_string(&r).unwrap();
        assert!(!json.contains("wall_time") && !json.contains("audit"));
    }
}

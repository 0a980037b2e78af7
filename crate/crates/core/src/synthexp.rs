//! The two synthetic demonstrations: uniform-noise leakage and the 2-D toy
//! geometry of both sampling orders, plus a two-Gaussian benchmark task.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::classify::ClassifierSpec;
use crate::evaluate::{run_pipeline, stratified_kfold, EvalError, PipelineSpec, Placement};
use crate::features::FeatureMatrix;
use crate::oversample::{resample, SamplerConfig};
use crate::rng::{derive_seed, stream, tag};

fn features(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

/// Row indices labelled 1: exactly `round(n × rate)` of them, chosen at random.
fn random_labels(n: usize, rate: f64, seed: u64) -> Vec<u8> {
    let n_pos = (n as f64 * rate).round() as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream(seed, tag::LABELS, 0));
    let mut labels = vec![0u8; n];
    for &i in &idx[..n_pos.min(n)] {
        labels[i] = 1;
    }
    labels
}

/// `n` points with i.i.d. U(0,1) coordinates and labels independent of them.
pub fn uniform_noise_matrix(
    n: usize,
    d: usize,
    pos_rate: f64,
    seed: u64,
) -> Result<FeatureMatrix, EvalError> {
    let mut rng = stream(seed, tag::DATASET, 0);
    let values: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>()).collect();
    let labels = random_labels(n, pos_rate, seed);
    let ids = (0..n).map(|i| format!("u{i:06}")).collect();
    Ok(FeatureMatrix::from_flat(values, features(d), labels, ids)?)
}

/// Class-conditional Gaussians: label 0 ~ N(0, I), label 1 ~ N(δ·1, I),
/// with exactly `round(n × minority_rate)` label-1 rows.
pub fn two_gaussian_task(
    n: usize,
    d: usize,
    minority_rate: f64,
    separation: f64,
    seed: u64,
) -> Result<FeatureMatrix, EvalError> {
    let labels = random_labels(n, minority_rate, seed);
    let mut rng = stream(seed, tag::DATASET, 1);
    let mut values = Vec::with_capacity(n * d);
    for &l in &labels {
        let shift = if l == 1 { separation } else { 0.0 };
        values
            .extend((0..d).map(|_| shift + Distribution::<f64>::sample(&StandardNormal, &mut rng)));
    }
    let ids = (0..n).map(|i| format!("g{i:06}")).collect();
    Ok(FeatureMatrix::from_flat(values, features(d), labels, ids)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageParams {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_rate")]
    pub pos_rate: f64,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub classifier: ClassifierSpec,
    #[serde(default = "default_folds")]
    pub n_folds: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    10_000
}
fn default_d() -> usize {
    5
}
fn default_rate() -> f64 {
    0.1
}
fn default_sampler() -> SamplerConfig {
    SamplerConfig::smote(1.0, 5)
}
fn default_folds() -> usize {
    10
}

impl Default for LeakageParams {
    fn default() -> Self {
        LeakageParams {
            n: default_n(),
            d: default_d(),
            pos_rate: default_rate(),
            sampler: default_sampler(),
            classifier: ClassifierSpec::knn(5),
            n_folds: default_folds(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageResult {
    pub auc_none: f64,
    pub auc_before: f64,
    pub auc_after: f64,
    pub n: usize,
    pub d: usize,
    pub pos_rate: f64,
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub classifier: ClassifierSpec,
    pub n_folds: usize,
}

/// Cross-validated AUC on label-independent uniform noise with no
/// over-sampling, over-sampling before the split, and after it. All three
/// runs share the fold seed.
pub fn uniform_leakage_experiment(p: &LeakageParams) -> Result<LeakageResult, EvalError> {
    if !(p.pos_rate > 0.0 && p.pos_rate < 1.0) || (p.n as f64 * p.pos_rate) < 20.0 {
        return Err(EvalError::InvalidSpec(format!(
            "n × pos_rate must be >= 20 (n={}, pos_rate={})",
            p.n, p.pos_rate
        )));
    }
    let m = uniform_noise_matrix(p.n, p.d, p.pos_rate, p.seed)?;
    let spec = |placement| PipelineSpec {
        sampler: p.sampler.clone(),
        classifier: p.classifier.clone(),
        placement,
        n_folds: p.n_folds,
        seed: p.seed,
        standardize: false,
        allow_leakage: placement == Placement::BeforeSplit,
    };
    let run = |placement| run_pipeline(&m, &spec(placement)).map(|r| r.aggregate.auc.mean);
    let (none, (before, after)) = rayon::join(
        || run(Placement::None),
        || {
            rayon::join(
                || run(Placement::BeforeSplit),
                || run(Placement::AfterSplit),
            )
        },
    );
    Ok(LeakageResult {
        auc_none: none?,
        auc_before: before?,
        auc_after: after?,
        n: p.n,
        d: p.d,
        pos_rate: p.pos_rate,
        seed: p.seed,
        sampler: p.sampler.clone(),
        classifier: p.classifier.clone(),
        n_folds: p.n_folds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToyRole {
    OriginalTrain,
    OriginalTest,
    SyntheticTrain,
    SyntheticTest,
}

impl ToyRole {
    pub fn as_str(self) -> &'static str {
        match self {
            ToyRole::OriginalTrain => "original_train",
            ToyRole::OriginalTest => "original_test",
            ToyRole::SyntheticTrain => "synthetic_train",
            ToyRole::SyntheticTest => "synthetic_test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyPoint {
    pub x: f64,
    pub y: f64,
    pub label: u8,
    pub role: ToyRole,
    /// `before` or `after`.
    pub mode: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Toy2d {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<u8>,
    /// Test fold (0..4) of each original point in the after-split pipeline.
    pub fold_assignment: Vec<usize>,
    pub rows: Vec<ToyPoint>,
}

impl Toy2d {
    pub fn synthetic(&self, mode: &str) -> impl Iterator<Item = &ToyPoint> + '_ {
        let mode = mode.to_string();
        self.rows.iter().filter(move |r| {
            r.mode == mode && matches!(r.role, ToyRole::SyntheticTrain | ToyRole::SyntheticTest)
        })
    }

    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out: String = comments.iter().map(|c| format!("# {c}\n")).collect();
        out.push_str("x,y,label,role,mode\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                crate::io::fmt_f64(r.x),
                crate::io::fmt_f64(r.y),
                r.label,
                r.role.as_str(),
                r.mode
            ));
        }
        out
    }
}

const TOY_FOLDS: usize = 4;

/// Geometry of both sampling orders on two overlapping 2-D blobs. The
/// held-out part is fold 0 of a stratified 4-fold split.
pub fn toy2d_figure_data(
    n: usize,
    n_pos: usize,
    sampler: &SamplerConfig,
    seed: u64,
) -> Result<Toy2d, EvalError> {
    if n_pos == 0 || n_pos >= n {
        return Err(EvalError::InvalidSpec(format!(
            "need 0 < n_pos < n (n={n}, n_pos={n_pos})"
        )));
    }
    let mut rng = stream(seed, tag::DATASET, 2);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream(seed, tag::LABELS, 0));
    let mut labels = vec![0u8; n];
    for &i in &idx[..n_pos] {
        labels[i] = 1;
    }
    let points: Vec<[f64; 2]> = labels
        .iter()
        .map(|&l| {
            let c = if l == 1 { 1.5 } else { 0.0 };
            let mut g = || Distribution::<f64>::sample(&StandardNormal, &mut rng);
            [c + g(), c + g()]
        })
        .collect();
    let m = FeatureMatrix::from_flat(
        points.iter().flatten().copied().collect(),
        vec!["x".into(), "y".into()],
        labels.clone(),
        (0..n).map(|i| format!("t{i:04}")).collect(),
    )?;
    let sampler = sampler
        .clone()
        .with_seed(derive_seed(seed, tag::SAMPLER, sampler.seed));
    let mut rows = Vec::new();
    let push = |rows: &mut Vec<ToyPoint>, p: &[f64], label: u8, role: ToyRole, mode: &str| {
        rows.push(ToyPoint {
            x: p[0],
            y: p[1],
            label,
            role,
            mode: mode.into(),
        });
    };

    // Over-sample everything, then split.
    let aug = resample(&m, &sampler)?;
    let folds = stratified_kfold(aug.matrix.labels(), TOY_FOLDS, seed)?;
    let mut in_test = vec![false; aug.matrix.n_rows()];
    for &i in &folds[0].test {
        in_test[i] = true;
    }
    for (i, &test) in in_test.iter().enumerate() {
        let role = match (aug.synthetic_mask[i], test) {
            (false, false) => ToyRole::OriginalTrain,
            (false, true) => ToyRole::OriginalTest,
            (true, false) => ToyRole::SyntheticTrain,
            (true, true) => ToyRole::SyntheticTest,
        };
        push(
            &mut rows,
            aug.matrix.row(i),
            aug.matrix.labels()[i],
            role,
            "before",
        );
    }

    // Split, then over-sample the training part only.
    let folds = stratified_kfold(&labels, TOY_FOLDS, seed)?;
    let mut fold_assignment = vec![0; n];
    for (f, fold) in folds.iter().enumerate() {
        for &i in &fold.test {
            fold_assignment[i] = f;
        }
    }
    let train = m.select_rows(&folds[0].train);
    let sampled = resample(&train, &sampler)?;
    for i in 0..n {
        let role = if fold_assignment[i] == 0 {
            ToyRole::OriginalTest
        } else {
            ToyRole::OriginalTrain
        };
        push(&mut rows, m.row(i), labels[i], role, "after");
    }
    for i in 0..sampled.matrix.n_rows() {
        if sampled.synthetic_mask[i] {
            push(
                &mut rows,
                sampled.matrix.row(i),
                1,
                ToyRole::SyntheticTrain,
                "after",
            );
        }
    }
    Ok(Toy2d {
        points,
        labels,
        fold_assignment,
        rows,
    })
}

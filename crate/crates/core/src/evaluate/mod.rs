//! Cross-validation with explicit over-sampling placement, metrics,
//! bootstrap feature ranking and nested sampler search.

mod bootstrap;
mod folds;
mod metrics;
mod pipeline;
mod search;

use serde::{Deserialize, Serialize};

use crate::classify::ClassifyError;
use crate::features::FeatureError;
use crate::oversample::SampleError;

pub use bootstrap::{bootstrap_feature_auc, rank_features, BootstrapAuc, RankedFeature};
pub use folds::{stratified_kfold, Fold};
pub use metrics::{auc, auc_counts, confusion_metrics, roc_points, Confusion, RocPoint};
pub use pipeline::{
    run_pipeline, Aggregate, FoldAudit, FoldReport, MetricsReport, PipelineSpec, Placement,
};
pub use search::{
    sampler_search, CandidateReport, SamplerGrid, SearchMode, SearchReport, SearchSpec,
};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("TooFewPerClass: label {label} has {count} rows, fewer than {k} folds")]
    TooFewPerClass { label: u8, count: usize, k: usize },
    #[error("SingleClass: both labels are required")]
    SingleClass,
    #[error(
        "LeakageNotAcknowledged: over-sampling before the split requires allow_leakage = true"
    )]
    LeakageNotAcknowledged,
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("LengthMismatch: {0} scores/predictions for {1} labels")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

impl EvalError {
    pub fn name(&self) -> &'static str {
        match self {
            EvalError::TooFewPerClass { .. } => "TooFewPerClass",
            EvalError::SingleClass => "SingleClass",
            EvalError::LeakageNotAcknowledged => "LeakageNotAcknowledged",
            EvalError::InvalidSpec(_) => "InvalidSpec",
            EvalError::LengthMismatch(..) => "LengthMismatch",
            EvalError::Sample(e) => e.name(),
            EvalError::Classify(e) => e.name(),
            EvalError::Feature(e) => e.name(),
        }
    }
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

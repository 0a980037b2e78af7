//! Minority over-sampling on [`FeatureMatrix`] rows.
//!
//! Label 1 is the minority class throughout. All samplers only add rows
//! (SMOTE-Tomek additionally removes Tomek links afterwards); original rows
//! come first, in input order, followed by the generated ones.

mod algorithms;
mod neighbors;

use serde::{Deserialize, Serialize};

use crate::features::{FeatureError, FeatureMatrix};
use crate::io::fmt_f64;

pub use algorithms::{
    adasyn, cluster_smote, kmeans, random_duplicate, smote, smote_tomek, tomek_links,
};
pub use neighbors::DistanceSpace;

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error("TooFewMinority: {have} minority rows, at least {need} required")]
    TooFewMinority { have: usize, need: usize },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Matrix(#[from] FeatureError),
}

impl SampleError {
    pub fn name(&self) -> &'static str {
        match self {
            SampleError::TooFewMinority { .. } => "TooFewMinority",
            SampleError::InvalidConfig(_) => "InvalidConfig",
            SampleError::Matrix(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    None,
    RandomDup,
    Smote,
    Adasyn,
    ClusterSmote,
    SmoteTomek,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::None => "none",
            Algorithm::RandomDup => "random_dup",
            Algorithm::Smote => "smote",
            Algorithm::Adasyn => "adasyn",
            Algorithm::ClusterSmote => "cluster_smote",
            Algorithm::SmoteTomek => "smote_tomek",
        }
    }
}

fn default_proportion() -> f64 {
    1.0
}

fn default_k() -> usize {
    5
}

fn default_clusters() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub algorithm: Algorithm,
    /// Target minority/majority ratio after sampling.
    #[serde(default = "default_proportion")]
    pub proportion: f64,
    #[serde(default = "default_k")]
    pub k_neighbors: usize,
    #[serde(default = "default_clusters")]
    pub n_clusters: usize,
    /// Measure distances on columns z-scored with the input's own statistics.
    #[serde(default)]
    pub standardize: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            algorithm: Algorithm::None,
            proportion: default_proportion(),
            k_neighbors: default_k(),
            n_clusters: default_clusters(),
            standardize: false,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SamplerConfig {
            algorithm,
            ..Default::default()
        }
    }

    pub fn smote(proportion: f64, k_neighbors: usize) -> Self {
        SamplerConfig {
            algorithm: Algorithm::Smote,
            proportion,
            k_neighbors,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        if !(self.proportion.is_finite() && self.proportion > 0.0) {
            return Err(SampleError::InvalidConfig(format!(
                "proportion must be > 0, got {}",
                self.proportion
            )));
        }
        if self.k_neighbors == 0 {
            return Err(SampleError::InvalidConfig(
                "k_neighbors must be >= 1".into(),
            ));
        }
        if self.algorithm == Algorithm::ClusterSmote && self.n_clusters == 0 {
            return Err(SampleError::InvalidConfig("n_clusters must be >= 1".into()));
        }
        Ok(())
    }

    /// Short human label, e.g. `smote(p=1,k=5)`.
    pub fn label(&self) -> String {
        match self.algorithm {
            Algorithm::None => "none".into(),
            Algorithm::RandomDup => format!("random_dup(p={})", self.proportion),
            Algorithm::ClusterSmote => {
                format!(
                    "cluster_smote(p={},k={},c={})",
                    self.proportion, self.k_neighbors, self.n_clusters
                )
            }
            a => format!(
                "{}(p={},k={})",
                a.as_str(),
                self.proportion,
                self.k_neighbors
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerWarning {
    /// The target proportion is already met; nothing was generated.
    NothingToDo { minority: usize, majority: usize },
    /// Fewer minority neighbours exist than requested.
    KNeighborsClamped { requested: usize, used: usize },
    /// A Tomek link was kept because removing it would empty a class.
    TomekRemovalSkipped { a: usize, b: usize },
}

/// Sampler output with per-row bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMatrix {
    pub matrix: FeatureMatrix,
    pub synthetic_mask: Vec<bool>,
    /// Input-row indices a synthetic row interpolates (`None` for originals).
    pub parents: Vec<Option<(usize, usize)>>,
    /// Input-row index of each original row (`None` for synthetics).
    pub source_index: Vec<Option<usize>>,
    /// Sample ids removed by Tomek-link cleaning.
    pub removed_ids: Vec<String>,
    pub warnings: Vec<SamplerWarning>,
}

impl SampledMatrix {
    /// The input, untouched.
    pub fn unchanged(m: &FeatureMatrix) -> Self {
        let n = m.n_rows();
        SampledMatrix {
            matrix: m.clone(),
            synthetic_mask: vec![false; n],
            parents: vec![None; n],
            source_index: (0..n).map(Some).collect(),
            removed_ids: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn n_synthetic(&self) -> usize {
        self.synthetic_mask.iter().filter(|&&s| s).count()
    }

    /// Feature CSV with extra `synthetic`, `parent_a`, `parent_b` columns.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let m = &self.matrix;
        let mut header = vec!["sample_id".to_string(), "label".to_string()];
        header.extend(m.feature_names().iter().cloned());
        header.extend(["synthetic", "parent_a", "parent_b"].map(String::from));
        w.write_record(&header).expect("in-memory write");
        for i in 0..m.n_rows() {
            let mut rec = vec![m.sample_ids()[i].clone(), m.labels()[i].to_string()];
            rec.extend(m.row(i).iter().map(|v| fmt_f64(*v)));
            rec.push(u8::from(self.synthetic_mask[i]).to_string());
            match self.parents[i] {
                Some((a, b)) => rec.extend([a.to_string(), b.to_string()]),
                None => rec.extend([String::new(), String::new()]),
            }
            w.write_record(&rec).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8"));
        out
    }
}

/// Number of rows to generate so that minority/majority reaches `proportion`.
pub fn synthetic_count(minority: usize, majority: usize, proportion: f64) -> isize {
    (proportion * majority as f64 - 1e-9).ceil() as isize - minority as isize
}

/// Runs the configured algorithm.
pub fn resample(m: &FeatureMatrix, cfg: &SamplerConfig) -> Result<SampledMatrix, SampleError> {
    cfg.validate()?;
    match cfg.algorithm {
        Algorithm::None => Ok(SampledMatrix::unchanged(m)),
        Algorithm::RandomDup => random_duplicate(m, cfg),
        Algorithm::Smote => smote(m, cfg),
        Algorithm::Adasyn => adasyn(m, cfg),
        Algorithm::ClusterSmote => cluster_smote(m, cfg),
        Algorithm::SmoteTomek => smote_tomek(m, cfg),
    }
}

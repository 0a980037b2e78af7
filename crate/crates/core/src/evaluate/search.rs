use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::auc;
use super::{stratified_kfold, EvalError, MeanStd};
use crate::classify::{fit, score, ClassifierSpec};
use crate::features::FeatureMatrix;
use crate::oversample::{resample, Algorithm, SamplerConfig};
use crate::rng::{derive_seed, tag};

/// Hyper-parameter grid for one algorithm; the candidates are the
/// cartesian product of the lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerGrid {
    pub algorithm: Algorithm,
    #[serde(default = "default_proportions")]
    pub proportions: Vec<f64>,
    #[serde(default = "default_ks")]
    pub k_neighbors: Vec<usize>,
    #[serde(default = "default_clusters")]
    pub n_clusters: Vec<usize>,
    #[serde(default)]
    pub standardize: bool,
}

fn default_proportions() -> Vec<f64> {
    vec![0.5, 0.75, 1.0]
}

fn default_ks() -> Vec<usize> {
    vec![3, 5, 7]
}

fn default_clusters() -> Vec<usize> {
    vec![2]
}

impl SamplerGrid {
    pub fn new(algorithm: Algorithm) -> Self {
        SamplerGrid {
            algorithm,
            proportions: default_proportions(),
            k_neighbors: default_ks(),
            n_clusters: default_clusters(),
            standardize: false,
        }
    }

    pub fn candidates(&self) -> Vec<SamplerConfig> {
        if self.algorithm == Algorithm::None {
            return vec![SamplerConfig::new(Algorithm::None)];
        }
        let ks: &[usize] = if self.algorithm == Algorithm::RandomDup {
            &self.k_neighbors[..1.min(self.k_neighbors.len())]
        } else {
            &self.k_neighbors
        };
        let cs: &[usize] = if self.algorithm == Algorithm::ClusterSmote {
            &self.n_clusters
        } else {
            &self.n_clusters[..1.min(self.n_clusters.len())]
        };
        let mut out = Vec::new();
        for &p in &self.proportions {
            for &k in ks {
                for &c in cs {
                    out.push(SamplerConfig {
                        algorithm: self.algorithm,
                        proportion: p,
                        k_neighbors: k,
                        n_clusters: c,
                        standardize: self.standardize,
                        seed: 0,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Tune the first grid's algorithm only.
    TunedSame,
    /// Pick the best candidate across all grids.
    BestOverall,
}

fn ten() -> usize {
    10
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub classifier: ClassifierSpec,
    pub grids: Vec<SamplerGrid>,
    pub mode: SearchMode,
    #[serde(default = "ten")]
    pub n_folds: usize,
    #[serde(default = "three")]
    pub inner_folds: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub config: SamplerConfig,
    /// Mean inner-CV AUC over outer folds.
    pub mean_inner_auc: f64,
    pub inner_auc_per_fold: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub mode: SearchMode,
    /// Candidate with the highest mean inner AUC over all outer folds.
    pub best_config: SamplerConfig,
    pub candidates: Vec<CandidateReport>,
    /// Index of the candidate chosen inside each outer fold.
    pub chosen_per_fold: Vec<usize>,
    pub outer_auc_per_fold: Vec<f64>,
    /// Outer-fold AUC of the per-fold winners.
    pub outer_auc: MeanStd,
}

fn sampled_auc(
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    cfg: &SamplerConfig,
    classifier: &ClassifierSpec,
    seed: u64,
) -> Result<f64, EvalError> {
    let s = resample(
        train,
        &cfg.clone().with_seed(derive_seed(seed, tag::SAMPLER, 0)),
    )?;
    let model = fit(
        classifier,
        &s.matrix.sorted_by_id(),
        derive_seed(seed, tag::CLASSIFIER, 0),
    )?;
    auc(&score(&model, test)?, test.labels())
}

/// Nested cross-validated choice of sampler configuration. The tuner only
/// ever sees the outer training partition.
pub fn sampler_search(m: &FeatureMatrix, spec: &SearchSpec) -> Result<SearchReport, EvalError> {
    if spec.grids.is_empty() {
        return Err(EvalError::InvalidSpec(
            "at least one sampler grid is required".into(),
        ));
    }
    spec.classifier.validate()?;
    let grids = match spec.mode {
        SearchMode::TunedSame => &spec.grids[..1],
        SearchMode::BestOverall => &spec.grids[..],
    };
    let candidates: Vec<SamplerConfig> = grids.iter().flat_map(SamplerGrid::candidates).collect();
    if candidates.is_empty() {
        return Err(EvalError::InvalidSpec(
            "sampler grids produce no candidates".into(),
        ));
    }
    for c in &candidates {
        c.validate()?;
    }
    let m = m.sorted_by_id();
    let outer = stratified_kfold(m.labels(), spec.n_folds, spec.seed)?;

    let per_fold: Vec<(Vec<f64>, usize, f64)> = outer
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let train = m.select_rows(&fold.train);
            let test = m.select_rows(&fold.test);
            let inner_seed = derive_seed(spec.seed, tag::INNER_FOLDS, f as u64);
            let inner = stratified_kfold(train.labels(), spec.inner_folds, inner_seed)?;
            let inner_aucs = candidates
                .par_iter()
                .enumerate()
                .map(|(c, cfg)| {
                    let aucs = inner
                        .iter()
                        .enumerate()
                        .map(|(i, ifold)| {
                            let unit = derive_seed(inner_seed, c as u64, i as u64);
                            sampled_auc(
                                &train.select_rows(&ifold.train),
                                &train.select_rows(&ifold.test),
                                cfg,
                                &spec.classifier,
                                unit,
                            )
                        })
                        .collect::<Result<Vec<_>, EvalError>>()?;
                    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
                })
                .collect::<Result<Vec<f64>, EvalError>>()?;
            let best = argmax(&inner_aucs);
            let outer_seed = derive_seed(spec.seed, tag::SAMPLER, f as u64);
            let outer_auc = sampled_auc(
                &train,
                &test,
                &candidates[best],
                &spec.classifier,
                outer_seed,
            )?;
            Ok((inner_aucs, best, outer_auc))
        })
        .collect::<Result<_, EvalError>>()?;

    let reports: Vec<CandidateReport> = candidates
        .iter()
        .enumerate()
        .map(|(c, cfg)| {
            let per: Vec<f64> = per_fold.iter().map(|p| p.0[c]).collect();
            CandidateReport {
                config: cfg.clone(),
                mean_inner_auc: per.iter().sum::<f64>() / per.len() as f64,
                inner_auc_per_fold: per,
            }
        })
        .collect();
    let overall = argmax(&reports.iter().map(|r| r.mean_inner_auc).collect::<Vec<_>>());
    let outer: Vec<f64> = per_fold.iter().map(|p| p.2).collect();
    Ok(SearchReport {
        mode: spec.mode,
        best_config: candidates[overall].clone(),
        candidates: reports,
        chosen_per_fold: per_fold.iter().map(|p| p.1).collect(),
        outer_auc: MeanStd::of(&outer),
        outer_auc_per_fold: outer,
    })
}

/// First index of the maximum.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

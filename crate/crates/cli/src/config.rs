//! The TOML experiment document.
//!
//! Every section is optional. A nested `seed` is not accepted; the top-level
//! `seed` (or `--seed`) drives every random stream.

use std::path::{Path, PathBuf};

use leakbench::classify::ClassifierSpec;
use leakbench::dataio::{CohortSpec, Preprocessing};
use leakbench::evaluate::{PipelineSpec, Placement, SamplerGrid, SearchMode, SearchSpec};
use leakbench::features::{preset, preset_features, FeatureSpec};
use leakbench::oversample::{Algorithm, SamplerConfig};
use leakbench::synthexp::LeakageParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const PRESET_ALL: &str = "table1_presets";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Where outputs go; `--out` takes precedence. Not embedded in outputs.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub input: InputConfig,
    #[serde(default)]
    pub preprocessing: Preprocessing,
    #[serde(default)]
    pub features: FeatureSelection,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub rank: RankConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub leakage: LeakageConfig,
}

/// Records come from a `csv_v1` directory when `path` is set, otherwise they
/// are generated from `cohort`. `features` points at a previously extracted
/// feature CSV and skips extraction in `run`, `search` and `rank`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub features: Option<PathBuf>,
    #[serde(default)]
    pub cohort: CohortConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CohortConfig {
    pub n_records: usize,
    pub preterm_fraction: f64,
    pub duration_seconds: f64,
    pub sampling_rate: f64,
    pub early_fraction: f64,
    pub signal_params: leakbench::dataio::SignalParams,
}

impl Default for CohortConfig {
    fn default() -> Self {
        let d = CohortSpec::default();
        CohortConfig {
            n_records: d.n_records,
            preterm_fraction: d.preterm_fraction,
            duration_seconds: d.duration_seconds,
            sampling_rate: d.sampling_rate,
            early_fraction: d.early_fraction,
            signal_params: d.signal_params,
        }
    }
}

/// `"table1_presets"`, a list of preset names, or a list of full specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureSelection {
    Preset(String),
    Names(Vec<String>),
    Specs(Vec<FeatureSpec>),
}

impl Default for FeatureSelection {
    fn default() -> Self {
        FeatureSelection::Preset(PRESET_ALL.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub classifier: ClassifierSpec,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default = "ten")]
    pub n_folds: usize,
    #[serde(default)]
    pub standardize: bool,
    #[serde(default)]
    pub allow_leakage: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sampler: SamplerConfig::default(),
            classifier: ClassifierSpec::default(),
            placement: Placement::None,
            n_folds: 10,
            standardize: false,
            allow_leakage: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankConfig {
    #[serde(default = "default_boot")]
    pub n_boot: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            n_boot: default_boot(),
        }
    }
}

/// One output row per classifier. The first grid's algorithm, at its
/// default settings, fills the "default" column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<ClassifierSpec>,
    #[serde(default = "default_grids")]
    pub grids: Vec<SamplerGrid>,
    #[serde(default = "three")]
    pub inner_folds: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            classifiers: default_classifiers(),
            grids: default_grids(),
            inner_folds: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageConfig {
    #[serde(default = "default_leak_n")]
    pub n: usize,
    #[serde(default = "default_leak_d")]
    pub d: usize,
    #[serde(default = "default_leak_rate")]
    pub pos_rate: f64,
    #[serde(default = "default_smote")]
    pub sampler: SamplerConfig,
    #[serde(default = "default_knn")]
    pub classifier: ClassifierSpec,
    #[serde(default = "ten")]
    pub n_folds: usize,
    #[serde(default)]
    pub toy: ToyConfig,
}

impl Default for LeakageConfig {
    fn default() -> Self {
        let p = LeakageParams::default();
        LeakageConfig {
            n: p.n,
            d: p.d,
            pos_rate: p.pos_rate,
            sampler: p.sampler,
            classifier: p.classifier,
            n_folds: p.n_folds,
            toy: ToyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyConfig {
    pub n: usize,
    pub n_pos: usize,
    pub sampler: SamplerConfig,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            n: 100,
            n_pos: 20,
            sampler: SamplerConfig::smote(1.0, 5),
        }
    }
}

fn ten() -> usize {
    10
}
fn three() -> usize {
    3
}
fn default_boot() -> usize {
    10_000
}
fn default_leak_n() -> usize {
    LeakageParams::default().n
}
fn default_leak_d() -> usize {
    LeakageParams::default().d
}
fn default_leak_rate() -> f64 {
    LeakageParams::default().pos_rate
}
fn default_smote() -> SamplerConfig {
    SamplerConfig::smote(1.0, 5)
}
fn default_knn() -> ClassifierSpec {
    ClassifierSpec::knn(5)
}
fn default_classifiers() -> Vec<ClassifierSpec> {
    vec![ClassifierSpec::knn(5)]
}
fn default_grids() -> Vec<SamplerGrid> {
    [
        Algorithm::Smote,
        Algorithm::Adasyn,
        Algorithm::ClusterSmote,
        Algorithm::SmoteTomek,
        Algorithm::RandomDup,
    ]
    .into_iter()
    .map(SamplerGrid::new)
    .collect()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.feature_specs()?;
        if cfg.search.grids.is_empty() {
            return Err(CliError::Config("search.grids must not be empty".into()));
        }
        if cfg.search.classifiers.is_empty() {
            return Err(CliError::Config(
                "search.classifiers must not be empty".into(),
            ));
        }
        Ok(cfg)
    }

    pub fn feature_specs(&self) -> Result<Vec<FeatureSpec>, CliError> {
        let specs = match &self.features {
            FeatureSelection::Preset(name) if name == PRESET_ALL => preset_features(),
            FeatureSelection::Preset(name) => vec![lookup(name)?],
            FeatureSelection::Names(names) => {
                names.iter().map(|n| lookup(n)).collect::<Result<_, _>>()?
            }
            FeatureSelection::Specs(specs) => specs.clone(),
        };
        if specs.is_empty() {
            return Err(CliError::Config("features must not be empty".into()));
        }
        for s in &specs {
            s.validate()
                .map_err(|e| CliError::Config(format!("feature {}: {e}", s.column_name())))?;
        }
        Ok(specs)
    }

    pub fn cohort_spec(&self) -> CohortSpec {
        let c = &self.input.cohort;
        CohortSpec {
            n_records: c.n_records,
            preterm_fraction: c.preterm_fraction,
            duration_seconds: c.duration_seconds,
            sampling_rate: c.sampling_rate,
            early_fraction: c.early_fraction,
            signal_params: c.signal_params,
            seed: self.seed,
        }
    }

    pub fn pipeline_spec(&self) -> PipelineSpec {
        let p = &self.pipeline;
        PipelineSpec {
            sampler: p.sampler.clone(),
            classifier: p.classifier.clone(),
            placement: p.placement,
            n_folds: p.n_folds,
            seed: self.seed,
            standardize: p.standardize,
            allow_leakage: p.allow_leakage,
        }
    }

    pub fn search_spec(&self, classifier: &ClassifierSpec, mode: SearchMode) -> SearchSpec {
        SearchSpec {
            classifier: classifier.clone(),
            grids: self.search.grids.clone(),
            mode,
            n_folds: self.pipeline.n_folds,
            inner_folds: self.search.inner_folds,
            seed: self.seed,
        }
    }

    pub fn leakage_params(&self) -> LeakageParams {
        let l = &self.leakage;
        LeakageParams {
            n: l.n,
            d: l.d,
            pos_rate: l.pos_rate,
            sampler: l.sampler.clone(),
            classifier: l.classifier.clone(),
            n_folds: l.n_folds,
            seed: self.seed,
        }
    }
}

fn lookup(name: &str) -> Result<FeatureSpec, CliError> {
    preset(name).ok_or_else(|| CliError::Config(format!("unknown feature preset {name:?}")))
}

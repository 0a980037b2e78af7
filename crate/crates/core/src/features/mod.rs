//! Univariate features computed on raw, EMD- or WPD-transformed channels,
//! and their assembly into a [`FeatureMatrix`].

mod matrix;
mod scalar;

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{Record, RecordSet};
use crate::signal::{wpd_with, Boundary, Emd, ImfSet, SignalError, Wavelet, WpdPath};

pub use matrix::FeatureMatrix;
pub use scalar::{
    basic_stats, coarse_grain, fwl_peak_power, higuchi_fd, median_frequency,
    multiscale_sample_entropy, peak_power, quantile, sample_entropy, teager_kaiser_energy,
    variance, wavelet_log_var, wavelet_log_var_diff, wavelet_log_var_with, yule_walker_ar,
    BasicStats, SAMPEN_CAP,
};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("SignalTooShort: {len} samples, at least {required} required")]
    SignalTooShort { len: usize, required: usize },
    #[error("NonPositiveVariance: log-variance of a constant sequence")]
    NonPositiveVariance,
    #[error("SingularAutocorrelation: zero-variance input")]
    SingularAutocorrelation,
    #[error("DegenerateSignal: {0}")]
    DegenerateSignal(String),
    #[error("AllValuesNonFinite: column {0} has no finite entry")]
    AllValuesNonFinite(String),
    #[error("InvalidParam: {0}")]
    InvalidParam(String),
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("NonFiniteValue at row {row}, column {column}")]
    NonFiniteValue { row: usize, column: usize },
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("IoFailure: {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("ParseError: {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl FeatureError {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureError::SignalTooShort { .. } => "SignalTooShort",
            FeatureError::NonPositiveVariance => "NonPositiveVariance",
            FeatureError::SingularAutocorrelation => "SingularAutocorrelation",
            FeatureError::DegenerateSignal(_) => "DegenerateSignal",
            FeatureError::AllValuesNonFinite(_) => "AllValuesNonFinite",
            FeatureError::InvalidParam(_) => "InvalidParam",
            FeatureError::InvalidSpec(_) => "InvalidSpec",
            FeatureError::ShapeMismatch(_) => "ShapeMismatch",
            FeatureError::NonFiniteValue { .. } => "NonFiniteValue",
            FeatureError::Signal(e) => e.name(),
            FeatureError::Io { .. } => "IoFailure",
            FeatureError::Parse { .. } => "ParseError",
        }
    }

    /// Errors that mean "this record has no meaningful value" rather than a
    /// misconfiguration; extraction turns them into missing values.
    fn is_degenerate(&self) -> bool {
        matches!(
            self,
            FeatureError::NonPositiveVariance
                | FeatureError::SingularAutocorrelation
                | FeatureError::DegenerateSignal(_)
        )
    }
}

/// The registered feature functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    SampleEntropy,
    StandardDeviation,
    InterquartileRange,
    Rms,
    PeakAmplitude,
    TeagerKaiserEnergy,
    HiguchiFd,
    YuleWalker,
    MedianFrequency,
    WaveletLogVar,
    WaveletLogVarDiff,
    PeakPower,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 12] = [
        FeatureKind::SampleEntropy,
        FeatureKind::StandardDeviation,
        FeatureKind::InterquartileRange,
        FeatureKind::Rms,
        FeatureKind::PeakAmplitude,
        FeatureKind::TeagerKaiserEnergy,
        FeatureKind::HiguchiFd,
        FeatureKind::YuleWalker,
        FeatureKind::MedianFrequency,
        FeatureKind::WaveletLogVar,
        FeatureKind::WaveletLogVarDiff,
        FeatureKind::PeakPower,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::SampleEntropy => "sample_entropy",
            FeatureKind::StandardDeviation => "standard_deviation",
            FeatureKind::InterquartileRange => "interquartile_range",
            FeatureKind::Rms => "rms",
            FeatureKind::PeakAmplitude => "peak_amplitude",
            FeatureKind::TeagerKaiserEnergy => "teager_kaiser_energy",
            FeatureKind::HiguchiFd => "higuchi_fd",
            FeatureKind::YuleWalker => "yule_walker",
            FeatureKind::MedianFrequency => "median_frequency",
            FeatureKind::WaveletLogVar => "wavelet_log_var",
            FeatureKind::WaveletLogVarDiff => "wavelet_log_var_diff",
            FeatureKind::PeakPower => "peak_power",
        }
    }

    /// Parameter names with their defaults.
    pub fn default_params(self) -> &'static [(&'static str, f64)] {
        match self {
            FeatureKind::SampleEntropy => &[("m", 3.0), ("r", 0.15), ("scale", 1.0)],
            FeatureKind::HiguchiFd => &[("k_max", 8.0)],
            FeatureKind::YuleWalker => &[("order", 4.0), ("coefficient", 1.0)],
            _ => &[],
        }
    }

    /// The log-variance kinds consume the packet path themselves.
    fn uses_path_directly(self) -> bool {
        matches!(
            self,
            FeatureKind::WaveletLogVar | FeatureKind::WaveletLogVarDiff
        )
    }
}

/// One feature column: a registered feature applied to one channel after
/// optional EMD selection and wavelet-packet projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub feature: FeatureKind,
    /// 1-based channel number.
    pub channel: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emd_stage: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wpd_path: Option<WpdPath>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    /// Column name; generated from the other fields when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
}

impl FeatureSpec {
    pub fn new(feature: FeatureKind, channel: usize) -> Self {
        FeatureSpec {
            feature,
            channel,
            emd_stage: None,
            wpd_path: None,
            params: BTreeMap::new(),
            column: None,
        }
    }

    pub fn emd(mut self, stage: usize) -> Self {
        self.emd_stage = Some(stage);
        self
    }

    pub fn path(mut self, path: &str) -> Self {
        self.wpd_path = Some(WpdPath::parse(path).expect("static path"));
        self
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn named(mut self, column: &str) -> Self {
        self.column = Some(column.to_string());
        self
    }

    pub fn column_name(&self) -> String {
        if let Some(c) = &self.column {
            return c.clone();
        }
        let mut s = format!("{}_ch{}", self.feature.as_str(), self.channel);
        if let Some(k) = self.emd_stage {
            s.push_str(&format!("_emd{k}"));
        }
        if let Some(p) = &self.wpd_path {
            s.push_str(&format!("_{}", p.as_str().to_ascii_lowercase()));
        }
        for (k, v) in &self.params {
            s.push_str(&format!("_{k}{v}"));
        }
        s
    }

    /// Checks channel, stage, path and parameter names and values.
    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |msg: String| {
            Err(FeatureError::InvalidSpec(format!(
                "{}: {msg}",
                self.column_name()
            )))
        };
        if !(1..=crate::dataio::N_CHANNELS).contains(&self.channel) {
            return bad(format!("channel {} is not in 1..=3", self.channel));
        }
        if self.emd_stage == Some(0) {
            return bad("emd_stage is 1-based".into());
        }
        if self.feature.uses_path_directly() && self.wpd_path.is_none() {
            return bad("wavelet log-variance needs wpd_path".into());
        }
        let known = self.feature.default_params();
        for (k, v) in &self.params {
            if !known.iter().any(|(name, _)| name == k) {
                return Err(FeatureError::InvalidParam(format!(
                    "{} has no parameter {k:?}",
                    self.feature.as_str()
                )));
            }
            if !v.is_finite() {
                return Err(FeatureError::InvalidParam(format!("{k} = {v}")));
            }
        }
        for &(name, _) in known {
            let v = self.get(name);
            let ok = match name {
                "r" => v > 0.0,
                _ => v >= 1.0 && v.fract() == 0.0,
            };
            if !ok {
                return Err(FeatureError::InvalidParam(format!("{name} = {v}")));
            }
        }
        if self.feature == FeatureKind::YuleWalker && self.get("coefficient") > self.get("order") {
            return Err(FeatureError::InvalidParam(
                "coefficient exceeds AR order".into(),
            ));
        }
        Ok(())
    }

    fn get(&self, name: &str) -> f64 {
        self.params.get(name).copied().unwrap_or_else(|| {
            self.feature
                .default_params()
                .iter()
                .find(|(n, _)| *n == name)
                .map(|p| p.1)
                .unwrap_or(f64::NAN)
        })
    }

    fn count(&self, name: &str) -> usize {
        self.get(name) as usize
    }

    /// Evaluates the scalar feature on an already-transformed sequence.
    pub fn evaluate(&self, x: &[f64], fs: f64) -> Result<f64, FeatureError> {
        match self.feature {
            FeatureKind::SampleEntropy => {
                multiscale_sample_entropy(x, self.count("m"), self.get("r"), self.count("scale"))
            }
            FeatureKind::StandardDeviation => Ok(basic_stats(x)?.std),
            FeatureKind::InterquartileRange => Ok(basic_stats(x)?.iqr),
            FeatureKind::Rms => Ok(basic_stats(x)?.rms),
            FeatureKind::PeakAmplitude => Ok(basic_stats(x)?.peak_amplitude),
            FeatureKind::TeagerKaiserEnergy => teager_kaiser_energy(x),
            FeatureKind::HiguchiFd => higuchi_fd(x, self.count("k_max")),
            FeatureKind::YuleWalker => {
                Ok(yule_walker_ar(x, self.count("order"))?[self.count("coefficient") - 1])
            }
            FeatureKind::MedianFrequency => median_frequency(x, fs),
            FeatureKind::PeakPower => peak_power(x, fs),
            FeatureKind::WaveletLogVar => {
                wavelet_log_var(x, self.wpd_path.as_ref().expect("validated"))
            }
            FeatureKind::WaveletLogVarDiff => {
                wavelet_log_var_diff(x, self.wpd_path.as_ref().expect("validated"))
            }
        }
    }

    /// Computes the feature on one record, reusing `imfs` for EMD stages.
    fn compute(&self, record: &Record, imfs: Option<&ImfSet>) -> Result<f64, FeatureError> {
        let raw = record.channel(self.channel).expect("validated channel");
        let mut fs = record.sampling_rate();
        let mut signal: Vec<f64> = match (self.emd_stage, imfs) {
            (Some(k), Some(set)) => set
                .imfs
                .get(k - 1)
                .cloned()
                .unwrap_or_else(|| set.residual.clone()),
            _ => raw.to_vec(),
        };
        if let (Some(path), false) = (&self.wpd_path, self.feature.uses_path_directly()) {
            signal =
                wpd_with(&signal, path, &Wavelet::default(), Boundary::default())?.coefficients;
            fs /= f64::from(1u32 << path.level().min(31));
        }
        self.evaluate(&signal, fs)
    }
}

/// The ten feature configurations of the best-performing published
/// feature set, in ranking order.
pub fn preset_features() -> Vec<FeatureSpec> {
    use FeatureKind::*;
    vec![
        FeatureSpec::new(SampleEntropy, 3)
            .emd(2)
            .path("AAA")
            .named("sampen_emd2_aaa_ch3"),
        FeatureSpec::new(StandardDeviation, 3)
            .emd(2)
            .path("AAAA")
            .named("std_emd2_aaaa_ch3"),
        FeatureSpec::new(TeagerKaiserEnergy, 3)
            .emd(2)
            .path("AAAA")
            .named("tke_emd2_aaaa_ch3"),
        FeatureSpec::new(InterquartileRange, 1)
            .emd(9)
            .path("AAAAD")
            .named("iqr_emd9_aaaad_ch1"),
        FeatureSpec::new(HiguchiFd, 3)
            .emd(3)
            .path("AD")
            .named("higuchi_emd3_ad_ch3"),
        FeatureSpec::new(SampleEntropy, 3)
            .param("m", 4.0)
            .param("scale", 5.0)
            .named("sampen_m4_s5_ch3"),
        FeatureSpec::new(YuleWalker, 3)
            .emd(2)
            .path("A")
            .named("yule_walker1_emd2_a_ch3"),
        FeatureSpec::new(MedianFrequency, 3).named("median_freq_ch3"),
        FeatureSpec::new(WaveletLogVarDiff, 3)
            .path("AAAD")
            .named("wavelet_logvar_diff_aaad_ch3"),
        FeatureSpec::new(PeakPower, 1)
            .emd(7)
            .named("fwl_peak_power_emd7_ch1"),
    ]
}

/// Looks up a preset by column name.
pub fn preset(name: &str) -> Option<FeatureSpec> {
    preset_features()
        .into_iter()
        .find(|s| s.column.as_deref() == Some(name))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ColumnImputation {
    pub column: String,
    pub median: f64,
    pub sample_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub imputation_count: usize,
    pub columns: Vec<ColumnImputation>,
}

/// One row per record, one column per spec. Degenerate values are replaced
/// by the median of the finite entries of their column.
pub fn extract_feature_matrix(
    set: &RecordSet,
    specs: &[FeatureSpec],
) -> Result<(FeatureMatrix, ExtractionReport), FeatureError> {
    if specs.is_empty() {
        return Err(FeatureError::InvalidSpec("no features requested".into()));
    }
    for s in specs {
        s.validate()?;
    }
    let names: Vec<String> = specs.iter().map(FeatureSpec::column_name).collect();
    let rows: Vec<Vec<f64>> = set
        .records()
        .par_iter()
        .map(|r| extract_row(r, specs))
        .collect::<Result<_, _>>()?;

    let mut columns: Vec<Vec<f64>> = (0..specs.len())
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    let mut report = ExtractionReport::default();
    for (j, col) in columns.iter_mut().enumerate() {
        let missing: Vec<usize> = (0..col.len()).filter(|&i| !col[i].is_finite()).collect();
        if missing.is_empty() {
            continue;
        }
        let mut finite: Vec<f64> = col.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return Err(FeatureError::AllValuesNonFinite(names[j].clone()));
        }
        finite.sort_by(f64::total_cmp);
        let med = quantile(&finite, 0.5);
        for &i in &missing {
            col[i] = med;
        }
        log::warn!(
            "{}: imputed {} value(s) with median {med}",
            names[j],
            missing.len()
        );
        report.imputation_count += missing.len();
        report.columns.push(ColumnImputation {
            column: names[j].clone(),
            median: med,
            sample_ids: missing
                .iter()
                .map(|&i| set.records()[i].id().to_string())
                .collect(),
        });
    }
    let n = set.len();
    let values = (0..n)
        .flat_map(|i| columns.iter().map(move |c| c[i]))
        .collect();
    let labels = set.iter().map(|r| r.label().as_binary()).collect();
    let ids = set.iter().map(|r| r.id().to_string()).collect();
    Ok((
        FeatureMatrix::from_flat(values, names, labels, ids)?,
        report,
    ))
}

fn extract_row(record: &Record, specs: &[FeatureSpec]) -> Result<Vec<f64>, FeatureError> {
    let mut imfs: BTreeMap<usize, ImfSet> = BTreeMap::new();
    for ch in 1..=crate::dataio::N_CHANNELS {
        let deepest = specs
            .iter()
            .filter(|s| s.channel == ch)
            .filter_map(|s| s.emd_stage)
            .max();
        if let Some(k) = deepest {
            let set = Emd::new(k)
                .decompose(record.channel(ch).expect("channel exists"))
                .map_err(|e| {
                    log::debug!("{}: EMD failed on channel {ch}: {e}", record.id());
                    e
                })?;
            imfs.insert(ch, set);
        }
    }
    specs
        .iter()
        .map(|s| match s.compute(record, imfs.get(&s.channel)) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Ok(f64::NAN),
            Err(e) if e.is_degenerate() => {
                log::debug!("{}: {} is undefined ({e})", record.id(), s.column_name());
                Ok(f64::NAN)
            }
            Err(e) => Err(e),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{Label, Provenance};

    fn record(id: &str, seed: u64, label: Label) -> Record {
        let ch = |k: u64| -> Vec<f64> {
            (0..600)
                .map(|i| {
                    ((i as f64) * (0.05 + 0.01 * (seed + k) as f64)).sin()
                        + 0.1 * ((i * 7 % 13) as f64)
                })
                .collect()
        };
        let deliv = if label == Label::Preterm { 34.0 } else { 39.0 };
        Record::new(id, [ch(0), ch(1), ch(2)], 20.0, 30.0, deliv, label).unwrap()
    }

    fn set() -> RecordSet {
        RecordSet::new(
            vec![
                record("a", 1, Label::Term),
                record("b", 2, Label::Preterm),
                record("c", 3, Label::Term),
                record("d", 4, Label::Preterm),
            ],
            Provenance::Synthetic,
        )
        .unwrap()
    }

    #[test]
    fn shape_and_label_alignment() {
        let specs = vec![
            FeatureSpec::new(FeatureKind::StandardDeviation, 1),
            FeatureSpec::new(FeatureKind::Rms, 2),
        ];
        let (m, rep) = extract_feature_matrix(&set(), &specs).unwrap();
        assert_eq!((m.n_rows(), m.n_features()), (4, 2));
        assert_eq!(m.labels(), [0, 1, 0, 1]);
        assert_eq!(m.sample_ids(), ["a", "b", "c", "d"]);
        assert_eq!(rep.imputation_count, 0);
        let x = set().records()[1].channel(1).unwrap().to_vec();
        assert_eq!(m.row(1)[0], basic_stats(&x).unwrap().std);
    }

    #[test]
    fn emd_then_wpd_composition() {
        let spec = FeatureSpec::new(FeatureKind::SampleEntropy, 3)
            .emd(2)
            .path("AAA");
        let s = set();
        let (m, _) = extract_feature_matrix(&s, &[spec]).unwrap();
        let raw = s.records()[0].channel(3).unwrap();
        let imf = crate::signal::nth_emd(raw, 2).unwrap();
        let node = crate::signal::wpd(&imf, "AAA", "db4").unwrap();
        assert_eq!(
            m.row(0)[0],
            sample_entropy(&node.coefficients, 3, 0.15).unwrap()
        );
    }

    #[test]
    fn degenerate_value_is_median_imputed() {
        let mut records = set().records().to_vec();
        let flat = Record::new(
            "e",
            [vec![1.0; 600], vec![1.0; 600], vec![1.0; 600]],
            20.0,
            30.0,
            39.0,
            Label::Term,
        )
        .unwrap();
        records.push(flat);
        let s = RecordSet::new(records, Provenance::Synthetic).unwrap();
        let spec = FeatureSpec::new(FeatureKind::WaveletLogVarDiff, 1).path("AD");
        let (m, rep) = extract_feature_matrix(&s, &[spec]).unwrap();
        assert_eq!(rep.imputation_count, 1);
        assert_eq!(rep.columns[0].sample_ids, ["e"]);
        let mut others = m.column(0)[..4].to_vec();
        others.sort_by(f64::total_cmp);
        assert_eq!(m.row(4)[0], (others[1] + others[2]) / 2.0);
    }

    #[test]
    fn all_non_finite_column_is_an_error() {
        let flat = |id: &str| {
            Record::new(
                id,
                [vec![2.0; 300], vec![2.0; 300], vec![2.0; 300]],
                20.0,
                30.0,
                39.0,
                Label::Term,
            )
            .unwrap()
        };
        let s = RecordSet::new(vec![flat("x"), flat("y")], Provenance::Synthetic).unwrap();
        let err = extract_feature_matrix(&s, &[FeatureSpec::new(FeatureKind::YuleWalker, 2)])
            .unwrap_err();
        assert!(matches!(err, FeatureError::AllValuesNonFinite(_)));
    }

    #[test]
    fn presets_are_valid_and_unique() {
        let p = preset_features();
        assert_eq!(p.len(), 10);
        for s in &p {
            s.validate().unwrap();
            assert_eq!(preset(&s.column_name()).as_ref(), Some(s));
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn spec_validation() {
        assert!(FeatureSpec::new(FeatureKind::Rms, 4).validate().is_err());
        assert!(FeatureSpec::new(FeatureKind::Rms, 1)
            .param("m", 2.0)
            .validate()
            .is_err());
        assert!(FeatureSpec::new(FeatureKind::SampleEntropy, 1)
            .param("r", -1.0)
            .validate()
            .is_err());
        assert!(FeatureSpec::new(FeatureKind::WaveletLogVar, 1)
            .validate()
            .is_err());
        assert!(FeatureSpec::new(FeatureKind::HiguchiFd, 1)
            .emd(0)
            .validate()
            .is_err());
    }

    #[test]
    fn spec_serde_round_trip() {
        let s = preset("higuchi_emd3_ad_ch3").unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"wpd_path\":\"AD\""));
        let back: FeatureSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}

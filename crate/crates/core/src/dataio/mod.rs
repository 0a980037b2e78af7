//! Records, record sets and their preprocessing.
//!
//! A [`Record`] is one patient's three-channel recording together with the
//! obstetric metadata needed to label it. Records are validated on
//! construction and are immutable afterwards.

mod csv_v1;
mod synth;

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::signal::{self, SignalError};

pub use csv_v1::{load_records, save_records, save_records_with_metadata, Format};
pub use synth::{generate_synthetic_cohort, ClassSignalParams, CohortSpec, SignalParams};

/// Deliveries before this gestational age (weeks) are preterm.
pub const PRETERM_THRESHOLD_WEEKS: f64 = 37.0;

/// Recordings at or before this gestational age (weeks) are "early".
pub const EARLY_RECORDING_MAX_WEEKS: f64 = 26.0;

pub const N_CHANNELS: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("MalformedHeader: {0}")]
    MalformedHeader(String),
    #[error("ChannelLengthMismatch: record {id} has channel lengths {lengths:?}")]
    ChannelLengthMismatch { id: String, lengths: [usize; 3] },
    #[error("NonFiniteSample: record {id}, channel {channel}, sample {index}")]
    NonFiniteSample {
        id: String,
        channel: usize,
        index: usize,
    },
    #[error(
        "LabelInconsistency: record {id} delivered at {delivery} weeks but labelled {label:?}"
    )]
    LabelInconsistency {
        id: String,
        delivery: f64,
        label: Label,
    },
    #[error("InvalidRecord: record {id}: {reason}")]
    InvalidRecord { id: String, reason: String },
    #[error("DuplicateId: {0}")]
    DuplicateId(String),
    #[error("EmptyRecordSet")]
    EmptyRecordSet,
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("RecordTooShort: record {id} has {len} samples, trimming needs more than {required}")]
    RecordTooShort {
        id: String,
        len: usize,
        required: usize,
    },
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

impl DataError {
    pub fn name(&self) -> &'static str {
        match self {
            DataError::MalformedHeader(_) => "MalformedHeader",
            DataError::ChannelLengthMismatch { .. } => "ChannelLengthMismatch",
            DataError::NonFiniteSample { .. } => "NonFiniteSample",
            DataError::LabelInconsistency { .. } => "LabelInconsistency",
            DataError::InvalidRecord { .. } => "InvalidRecord",
            DataError::DuplicateId(_) => "DuplicateId",
            DataError::EmptyRecordSet => "EmptyRecordSet",
            DataError::InvalidSpec(_) => "InvalidSpec",
            DataError::RecordTooShort { .. } => "RecordTooShort",
            DataError::Io { .. } => "IoFailure",
            DataError::Parse { .. } => "ParseError",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Term,
    Preterm,
}

impl Label {
    /// The label implied by a delivery gestational age.
    pub fn from_delivery_weeks(weeks: f64) -> Self {
        if weeks < PRETERM_THRESHOLD_WEEKS {
            Label::Preterm
        } else {
            Label::Term
        }
    }

    /// 1 for the minority (preterm) class.
    pub fn as_binary(self) -> u8 {
        match self {
            Label::Term => 0,
            Label::Preterm => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Term => "Term",
            Label::Preterm => "Preterm",
        }
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "term" | "t" | "0" => Ok(Label::Term),
            "preterm" | "p" | "1" => Ok(Label::Preterm),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic,
    Imported,
}

/// One patient's three-channel recording plus metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    id: String,
    channels: [Vec<f64>; N_CHANNELS],
    sampling_rate: f64,
    gestation_at_recording: f64,
    gestation_at_delivery: f64,
    label: Label,
    covariates: BTreeMap<String, f64>,
}

impl Record {
    pub fn new(
        id: impl Into<String>,
        channels: [Vec<f64>; N_CHANNELS],
        sampling_rate: f64,
        gestation_at_recording: f64,
        gestation_at_delivery: f64,
        label: Label,
    ) -> Result<Self, DataError> {
        let record = Record {
            id: id.into(),
            channels,
            sampling_rate,
            gestation_at_recording,
            gestation_at_delivery,
            label,
            covariates: BTreeMap::new(),
        };
        record.validate()?;
        Ok(record)
    }

    pub fn with_covariates(mut self, covariates: BTreeMap<String, f64>) -> Self {
        self.covariates = covariates;
        self
    }

    fn validate(&self) -> Result<(), DataError> {
        let invalid = |reason: &str| DataError::InvalidRecord {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.id.is_empty() {
            return Err(invalid("empty id"));
        }
        let lengths = [
            self.channels[0].len(),
            self.channels[1].len(),
            self.channels[2].len(),
        ];
        if lengths[0] != lengths[1] || lengths[1] != lengths[2] {
            return Err(DataError::ChannelLengthMismatch {
                id: self.id.clone(),
                lengths,
            });
        }
        for (c, ch) in self.channels.iter().enumerate() {
            if let Some(index) = ch.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFiniteSample {
                    id: self.id.clone(),
                    channel: c + 1,
                    index,
                });
            }
        }
        if !(self.sampling_rate.is_finite() && self.sampling_rate > 0.0) {
            return Err(invalid("sampling rate must be positive"));
        }
        if !(self.gestation_at_recording.is_finite() && self.gestation_at_recording > 0.0)
            || !(self.gestation_at_delivery.is_finite() && self.gestation_at_delivery > 0.0)
        {
            return Err(invalid("gestational ages must be positive"));
        }
        if self.gestation_at_recording > self.gestation_at_delivery {
            return Err(invalid("recorded after delivery"));
        }
        if Label::from_delivery_weeks(self.gestation_at_delivery) != self.label {
            return Err(DataError::LabelInconsistency {
                id: self.id.clone(),
                delivery: self.gestation_at_delivery,
                label: self.label,
            });
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn channels(&self) -> &[Vec<f64>; N_CHANNELS] {
        &self.channels
    }

    /// Channel by its 1-based number.
    pub fn channel(&self, number: usize) -> Option<&[f64]> {
        number
            .checked_sub(1)
            .and_then(|i| self.channels.get(i))
            .map(Vec::as_slice)
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn gestation_at_recording(&self) -> f64 {
        self.gestation_at_recording
    }

    pub fn gestation_at_delivery(&self) -> f64 {
        self.gestation_at_delivery
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn covariates(&self) -> &BTreeMap<String, f64> {
        &self.covariates
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_seconds(&self) -> f64 {
        self.len() as f64 / self.sampling_rate
    }

    fn map_channels<F>(&self, f: F) -> Result<Record, DataError>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, DataError>,
    {
        let channels = [
            f(&self.channels[0])?,
            f(&self.channels[1])?,
            f(&self.channels[2])?,
        ];
        Ok(Record {
            channels,
            ..self.clone_meta()
        })
    }

    fn clone_meta(&self) -> Record {
        Record {
            id: self.id.clone(),
            channels: [Vec::new(), Vec::new(), Vec::new()],
            sampling_rate: self.sampling_rate,
            gestation_at_recording: self.gestation_at_recording,
            gestation_at_delivery: self.gestation_at_delivery,
            label: self.label,
            covariates: self.covariates.clone(),
        }
    }
}

/// An ordered collection of records with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    records: Vec<Record>,
    provenance: Provenance,
}

impl RecordSet {
    /// Builds a set; ids must be unique. Empty sets are allowed because
    /// filtering operations may legitimately produce them.
    pub fn new(records: Vec<Record>, provenance: Provenance) -> Result<Self, DataError> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(DataError::DuplicateId(r.id.clone()));
            }
        }
        Ok(RecordSet {
            records,
            provenance,
        })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Record> {
        self.records.iter()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    fn filtered<P: Fn(&Record) -> bool>(&self, keep: P) -> RecordSet {
        RecordSet {
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
            provenance: self.provenance,
        }
    }
}

/// Removes `trim_seconds` worth of samples from both ends of every channel.
pub fn trim_record(record: &Record, trim_seconds: f64) -> Result<Record, DataError> {
    if !(trim_seconds.is_finite() && trim_seconds >= 0.0) {
        return Err(DataError::InvalidSpec(format!(
            "trim_seconds must be non-negative, got {trim_seconds}"
        )));
    }
    let cut = (trim_seconds * record.sampling_rate).round() as usize;
    if cut == 0 {
        return Ok(record.clone());
    }
    if record.len() <= 2 * cut {
        return Err(DataError::RecordTooShort {
            id: record.id.clone(),
            len: record.len(),
            required: 2 * cut,
        });
    }
    record.map_channels(|ch| Ok(ch[cut..ch.len() - cut].to_vec()))
}

/// Keeps records lasting at least `min_duration_seconds`, in order.
pub fn drop_short_records(set: &RecordSet, min_duration_seconds: f64) -> RecordSet {
    set.filtered(|r| r.duration_seconds() >= min_duration_seconds)
}

/// Splits into (recorded at or before 26 weeks, recorded later).
pub fn split_early_late(set: &RecordSet) -> (RecordSet, RecordSet) {
    (
        set.filtered(|r| r.gestation_at_recording <= EARLY_RECORDING_MAX_WEEKS),
        set.filtered(|r| r.gestation_at_recording > EARLY_RECORDING_MAX_WEEKS),
    )
}

/// Settings of the band-pass, trim and exclusion chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Preprocessing {
    /// Apply the band-pass filter before trimming.
    pub filter: bool,
    pub low_hz: f64,
    pub high_hz: f64,
    pub filter_order: usize,
    pub trim_seconds: f64,
    /// Records shorter than this (before trimming) are dropped.
    pub min_duration_seconds: f64,
}

impl Default for Preprocessing {
    fn default() -> Self {
        Preprocessing {
            filter: true,
            low_hz: 0.08,
            high_hz: 4.0,
            filter_order: 4,
            trim_seconds: 150.0,
            min_duration_seconds: 0.0,
        }
    }
}

/// Drops short records, band-passes every channel, then trims both ends.
pub fn preprocess(set: &RecordSet, cfg: &Preprocessing) -> Result<RecordSet, crate::Error> {
    let kept = drop_short_records(set, cfg.min_duration_seconds);
    let records = kept
        .records
        .par_iter()
        .map(|r| -> Result<Record, crate::Error> {
            let filtered = if cfg.filter {
                let mut out = r.clone_meta();
                for (c, ch) in r.channels.iter().enumerate() {
                    out.channels[c] = signal::butterworth_bandpass(
                        ch,
                        r.sampling_rate,
                        cfg.low_hz,
                        cfg.high_hz,
                        cfg.filter_order,
                    )
                    .map_err(|e: SignalError| crate::Error::from(e))?;
                }
                out
            } else {
                r.clone()
            };
            Ok(trim_record(&filtered, cfg.trim_seconds)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RecordSet {
        records,
        provenance: kept.provenance,
    })
}

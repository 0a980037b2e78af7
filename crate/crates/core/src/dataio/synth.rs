//! Synthetic cohorts shaped like a term/preterm EHG database.
//!
//! Each channel is Gaussian baseline noise plus bursts of a 0.3-1.0 Hz
//! sinusoid under a Hann envelope, standing in for contractions. Burst rate
//! and amplitude are class-conditional, so spectral and regularity features
//! carry a weak but real label signal.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DataError, Label, Provenance, Record, RecordSet, EARLY_RECORDING_MAX_WEEKS};
use crate::rng::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSignalParams {
    /// Mean number of bursts per minute.
    pub burst_rate_per_min: f64,
    /// Peak burst amplitude (mV).
    pub burst_amplitude: f64,
    /// Standard deviation of the baseline noise (mV).
    pub noise_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalParams {
    pub term: ClassSignalParams,
    pub preterm: ClassSignalParams,
}

impl Default for SignalParams {
    fn default() -> Self {
        SignalParams {
            term: ClassSignalParams {
                burst_rate_per_min: 0.4,
                burst_amplitude: 0.6,
                noise_std: 0.5,
            },
            preterm: ClassSignalParams {
                burst_rate_per_min: 0.5,
                burst_amplitude: 0.68,
                noise_std: 0.5,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CohortSpec {
    pub n_records: usize,
    pub preterm_fraction: f64,
    pub duration_seconds: f64,
    pub sampling_rate: f64,
    /// Fraction of records taken at or before 26 weeks.
    pub early_fraction: f64,
    pub signal_params: SignalParams,
    pub seed: u64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            n_records: 298,
            preterm_fraction: 38.0 / 298.0,
            duration_seconds: 1800.0,
            sampling_rate: 20.0,
            early_fraction: 0.54,
            signal_params: SignalParams::default(),
            seed: 7,
        }
    }
}

impl CohortSpec {
    /// Samples per channel, or an error if duration × rate is not integral.
    pub fn sample_count(&self) -> Result<usize, DataError> {
        let exact = self.duration_seconds * self.sampling_rate;
        let n = exact.round();
        if !exact.is_finite() || n < 1.0 || (exact - n).abs() > 1e-6 {
            return Err(DataError::InvalidSpec(format!(
                "duration_seconds × sampling_rate = {exact} is not a positive integer"
            )));
        }
        Ok(n as usize)
    }

    pub fn preterm_count(&self) -> usize {
        (self.n_records as f64 * self.preterm_fraction).round() as usize
    }

    fn validate(&self) -> Result<usize, DataError> {
        let bad = |m: String| Err(DataError::InvalidSpec(m));
        if self.n_records < 2 {
            return bad(format!(
                "n_records must be at least 2, got {}",
                self.n_records
            ));
        }
        if !(self.preterm_fraction > 0.0 && self.preterm_fraction < 1.0) {
            return bad(format!(
                "preterm_fraction must lie in (0, 1), got {}",
                self.preterm_fraction
            ));
        }
        if !(0.0..=1.0).contains(&self.early_fraction) {
            return bad(format!(
                "early_fraction must lie in [0, 1], got {}",
                self.early_fraction
            ));
        }
        if !(self.sampling_rate > 0.0 && self.duration_seconds > 0.0) {
            return bad("sampling_rate and duration_seconds must be positive".into());
        }
        for p in [self.signal_params.term, self.signal_params.preterm] {
            if !(p.burst_rate_per_min >= 0.0 && p.burst_amplitude >= 0.0 && p.noise_std > 0.0) {
                return bad(format!("invalid class signal parameters {p:?}"));
            }
        }
        self.sample_count()
    }
}

/// Generates a deterministic cohort. Record `i` draws from its own stream,
/// so generation parallelizes without changing the output.
pub fn generate_synthetic_cohort(spec: &CohortSpec) -> Result<RecordSet, DataError> {
    let n_samples = spec.validate()?;
    let n = spec.n_records;
    let n_pre = spec.preterm_count();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(spec.seed, tag::LABELS, 0));
    let mut labels = vec![Label::Term; n];
    for &i in &order[..n_pre] {
        labels[i] = Label::Preterm;
    }

    // Early/late split is stratified by class so both groups hold both labels.
    let mut early = vec![false; n];
    let mut split_rng = rng::stream(spec.seed, tag::LABELS, 1);
    for class in [Label::Term, Label::Preterm] {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut split_rng);
        let k = (members.len() as f64 * spec.early_fraction).round() as usize;
        for &i in &members[..k] {
            early[i] = true;
        }
    }

    let width = (n.max(2) as f64).log10().ceil().max(4.0) as usize;
    let records = (0..n)
        .into_par_iter()
        .map(|i| generate_record(spec, i, width, labels[i], early[i], n_samples))
        .collect::<Result<Vec<_>, _>>()?;
    RecordSet::new(records, Provenance::Synthetic)
}

fn generate_record(
    spec: &CohortSpec,
    index: usize,
    width: usize,
    label: Label,
    early: bool,
    n_samples: usize,
) -> Result<Record, DataError> {
    let mut rng = rng::stream(spec.seed, tag::COHORT, index as u64);
    let recording = if early {
        Normal::<f64>::new(23.11, 0.77)
            .unwrap()
            .sample(&mut rng)
            .clamp(20.0, EARLY_RECORDING_MAX_WEEKS)
    } else {
        Normal::<f64>::new(31.09, 1.05)
            .unwrap()
            .sample(&mut rng)
            .clamp(EARLY_RECORDING_MAX_WEEKS + 0.05, 36.0)
    };
    let delivery = match label {
        Label::Preterm => rng.random_range((recording + 0.3)..36.9),
        Label::Term => rng.random_range(37.0..42.0),
    };
    let params = match label {
        Label::Term => spec.signal_params.term,
        Label::Preterm => spec.signal_params.preterm,
    };
    let fs = spec.sampling_rate;

    // Shared burst schedule; bursts propagate to all electrodes with
    // channel-specific gains.
    let rate_jitter = rng.random_range(0.5..1.5);
    let rate_per_sec = params.burst_rate_per_min * rate_jitter / 60.0;
    let mut bursts = Vec::new();
    if rate_per_sec > 0.0 {
        let mut t = 0.0;
        loop {
            let u: f64 = rng.random();
            t += -(1.0 - u).ln() / rate_per_sec;
            if t >= spec.duration_seconds {
                break;
            }
            let dur = rng.random_range(30.0..60.0);
            let freq = rng.random_range(0.3..1.0);
            let amp = params.burst_amplitude * rng.random_range(0.7..1.3);
            let phase = rng.random_range(0.0..2.0 * PI);
            bursts.push((t, dur, freq, amp, phase));
        }
    }

    let noise = Normal::new(0.0, params.noise_std).unwrap();
    let mut channels: [Vec<f64>; 3] = Default::default();
    for ch in channels.iter_mut() {
        let gain = rng.random_range(0.6..1.2);
        let offset = rng.random_range(-1.0..1.0);
        let mut x: Vec<f64> = (0..n_samples)
            .map(|_| offset + noise.sample(&mut rng))
            .collect();
        for &(start, dur, freq, amp, phase) in &bursts {
            let first = (start * fs).ceil() as usize;
            let last = (((start + dur) * fs).floor() as usize).min(n_samples.saturating_sub(1));
            for (j, v) in x.iter_mut().enumerate().take(last + 1).skip(first) {
                let t = j as f64 / fs;
                let env = 0.5 - 0.5 * (2.0 * PI * (t - start) / dur).cos();
                *v += gain * amp * env * (2.0 * PI * freq * (t - start) + phase).sin();
            }
        }
        *ch = x;
    }

    let covariates = BTreeMap::from([
        (
            "maternal_age".to_string(),
            (rng.random_range(18.0..42.0_f64) * 10.0).round() / 10.0,
        ),
        (
            "maternal_weight_kg".to_string(),
            (rng.random_range(50.0..100.0_f64) * 10.0).round() / 10.0,
        ),
        (
            "prior_abortion".to_string(),
            if rng.random_bool(0.2) { 1.0 } else { 0.0 },
        ),
    ]);
    Ok(Record::new(
        format!("syn{index:0width$}"),
        channels,
        fs,
        recording,
        delivery,
        label,
    )?
    .with_covariates(covariates))
}

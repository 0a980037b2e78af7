//! The `csv_v1` directory layout.
//!
//! ```text
//! dir/
//!   manifest.csv     id, channel1_file, channel2_file, channel3_file,
//!                    sampling_rate_hz, gestation_recording_weeks,
//!                    gestation_delivery_weeks, label, [covariates...]
//!   <id>_ch1.csv     one sample per line
//!   metadata.json    format tag, provenance, writer metadata
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DataError, Label, Provenance, Record, RecordSet, N_CHANNELS};
use crate::io::{fmt_f64, write_atomic};

pub const MANIFEST: &str = "manifest.csv";
pub const METADATA: &str = "metadata.json";

const REQUIRED: [&str; 8] = [
    "id",
    "channel1_file",
    "channel2_file",
    "channel3_file",
    "sampling_rate_hz",
    "gestation_recording_weeks",
    "gestation_delivery_weeks",
    "label",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    CsvV1,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a `csv_v1` directory. Record order follows the manifest.
pub fn load_records(dir: &Path, format: Format) -> Result<RecordSet, DataError> {
    let Format::CsvV1 = format;
    let manifest = dir.join(MANIFEST);
    let text = fs::read_to_string(&manifest).map_err(io_err(&manifest))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DataError::MalformedHeader(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut col = BTreeMap::new();
    for name in REQUIRED {
        let idx = headers.iter().position(|h| h == name).ok_or_else(|| {
            DataError::MalformedHeader(format!("manifest is missing column {name:?}"))
        })?;
        col.insert(name, idx);
    }
    let covariate_cols: Vec<(usize, &str)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !REQUIRED.contains(&h.as_str()))
        .map(|(i, h)| (i, h.as_str()))
        .collect();

    let mut records = Vec::new();
    for (row, result) in reader.records().enumerate() {
        let line = row + 2;
        let rec = result.map_err(|e| DataError::Parse {
            path: manifest.clone(),
            line,
            msg: e.to_string(),
        })?;
        let field = |name: &str| rec.get(col[name]).unwrap_or("");
        let number = |name: &str| -> Result<f64, DataError> {
            field(name).parse::<f64>().map_err(|e| DataError::Parse {
                path: manifest.clone(),
                line,
                msg: format!("{name}: {e}"),
            })
        };
        let id = field("id").to_string();
        let label: Label = field("label").parse().map_err(|msg| DataError::Parse {
            path: manifest.clone(),
            line,
            msg,
        })?;
        let mut channels: [Vec<f64>; N_CHANNELS] = Default::default();
        for (c, slot) in channels.iter_mut().enumerate() {
            let file = dir.join(field(&format!("channel{}_file", c + 1)));
            *slot = read_channel(&file)?;
        }
        let mut covariates = BTreeMap::new();
        for &(i, name) in &covariate_cols {
            let raw = rec.get(i).unwrap_or("");
            if raw.is_empty() {
                continue;
            }
            let v = raw.parse::<f64>().map_err(|e| DataError::Parse {
                path: manifest.clone(),
                line,
                msg: format!("{name}: {e}"),
            })?;
            covariates.insert(name.to_string(), v);
        }
        let record = Record::new(
            id,
            channels,
            number("sampling_rate_hz")?,
            number("gestation_recording_weeks")?,
            number("gestation_delivery_weeks")?,
            label,
        )?
        .with_covariates(covariates);
        records.push(record);
    }
    if records.is_empty() {
        return Err(DataError::EmptyRecordSet);
    }
    RecordSet::new(records, Provenance::Imported)
}

fn read_channel(path: &Path) -> Result<Vec<f64>, DataError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|e| DataError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

/// Channel file name used when saving.
pub fn channel_file_name(id: &str, channel: usize) -> String {
    let safe: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}_ch{channel}.csv")
}

/// Writes `set` as a `csv_v1` directory at full float precision.
pub fn save_records(set: &RecordSet, dir: &Path) -> Result<(), DataError> {
    save_records_with_metadata(set, dir, serde_json::Value::Null)
}

/// Like [`save_records`], with caller-supplied metadata stored under
/// `"writer"` in `metadata.json`.
pub fn save_records_with_metadata(
    set: &RecordSet,
    dir: &Path,
    writer: serde_json::Value,
) -> Result<(), DataError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let covariate_names: BTreeSet<&str> = set
        .iter()
        .flat_map(|r| r.covariates.keys().map(String::as_str))
        .collect();

    let mut manifest = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header: Vec<&str> = REQUIRED.to_vec();
    header.extend(covariate_names.iter().copied());
    let manifest_path = dir.join(MANIFEST);
    let csv_err = |e: csv::Error| DataError::Io {
        path: manifest_path.clone(),
        source: e.into(),
    };
    manifest.write_record(&header).map_err(csv_err)?;

    let mut used_names = BTreeSet::new();
    for r in set.iter() {
        let mut files = Vec::with_capacity(N_CHANNELS);
        for (c, ch) in r.channels.iter().enumerate() {
            let name = channel_file_name(&r.id, c + 1);
            if !used_names.insert(name.clone()) {
                return Err(DataError::DuplicateId(format!(
                    "{} (file name collision {name})",
                    r.id
                )));
            }
            let mut body = String::with_capacity(ch.len() * 20);
            for v in ch {
                body.push_str(&fmt_f64(*v));
                body.push('\n');
            }
            let path = dir.join(&name);
            write_atomic(&path, body.as_bytes()).map_err(io_err(&path))?;
            files.push(name);
        }
        let mut row = vec![
            r.id.clone(),
            files[0].clone(),
            files[1].clone(),
            files[2].clone(),
            fmt_f64(r.sampling_rate),
            fmt_f64(r.gestation_at_recording),
            fmt_f64(r.gestation_at_delivery),
            r.label.as_str().to_string(),
        ];
        for name in &covariate_names {
            row.push(
                r.covariates
                    .get(*name)
                    .map(|v| fmt_f64(*v))
                    .unwrap_or_default(),
            );
        }
        manifest.write_record(&row).map_err(csv_err)?;
    }
    let bytes = manifest.into_inner().map_err(|e| DataError::Io {
        path: manifest_path.clone(),
        source: std::io::Error::other(e.to_string()),
    })?;
    write_atomic(&manifest_path, &bytes).map_err(io_err(&manifest_path))?;

    let metadata = serde_json::json!({
        "format": Format::CsvV1,
        "provenance": set.provenance(),
        "n_records": set.len(),
        "writer": writer,
    });
    let meta_path: PathBuf = dir.join(METADATA);
    let text = serde_json::to_string_pretty(&metadata).expect("metadata serializes") + "\n";
    write_atomic(&meta_path, text.as_bytes()).map_err(io_err(&meta_path))?;
    Ok(())
}

use std::collections::HashSet;
use std::path::Path;

use super::FeatureError;
use crate::io::{fmt_f64, write_atomic};

/// Samples × features with aligned binary labels (1 = minority) and ids.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    n_rows: usize,
    feature_names: Vec<String>,
    labels: Vec<u8>,
    sample_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        rows: Vec<Vec<f64>>,
        feature_names: Vec<String>,
        labels: Vec<u8>,
        sample_ids: Vec<String>,
    ) -> Result<Self, FeatureError> {
        let d = feature_names.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(FeatureError::ShapeMismatch(format!(
                "row {i} has {} values, expected {d}",
                r.len()
            )));
        }
        let values = rows.into_iter().flatten().collect();
        Self::from_flat(values, feature_names, labels, sample_ids)
    }

    /// Builds from a row-major buffer.
    pub fn from_flat(
        values: Vec<f64>,
        feature_names: Vec<String>,
        labels: Vec<u8>,
        sample_ids: Vec<String>,
    ) -> Result<Self, FeatureError> {
        let n = labels.len();
        let d = feature_names.len();
        if values.len() != n * d || sample_ids.len() != n {
            return Err(FeatureError::ShapeMismatch(format!(
                "{} values, {} labels, {} ids for {d} features",
                values.len(),
                n,
                sample_ids.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(FeatureError::ShapeMismatch(format!(
                "label {bad} is not binary"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFiniteValue {
                row: i / d.max(1),
                column: i % d.max(1),
            });
        }
        let mut seen = HashSet::with_capacity(n);
        if let Some(dup) = sample_ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(FeatureError::ShapeMismatch(format!(
                "duplicate sample id {dup:?}"
            )));
        }
        Ok(FeatureMatrix {
            values,
            n_rows: n,
            feature_names,
            labels,
            sample_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    /// (majority/label-0 count, minority/label-1 count).
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (self.n_rows - pos, pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (neg, pos) = self.class_counts();
        neg > 0 && pos > 0
    }

    /// Rows at `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        let d = self.n_features();
        let mut values = Vec::with_capacity(idx.len() * d);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            values,
            n_rows: idx.len(),
            feature_names: self.feature_names.clone(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            sample_ids: idx.iter().map(|&i| self.sample_ids[i].clone()).collect(),
        }
    }

    /// Columns at `idx`, in that order.
    pub fn select_columns(&self, idx: &[usize]) -> FeatureMatrix {
        let values = self
            .rows()
            .flat_map(|r| idx.iter().map(move |&j| r[j]))
            .collect();
        FeatureMatrix {
            values,
            n_rows: self.n_rows,
            feature_names: idx.iter().map(|&j| self.feature_names[j].clone()).collect(),
            labels: self.labels.clone(),
            sample_ids: self.sample_ids.clone(),
        }
    }

    /// Row order that sorts by sample id.
    pub fn id_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n_rows).collect();
        order.sort_by(|&a, &b| self.sample_ids[a].cmp(&self.sample_ids[b]));
        order
    }

    pub fn sorted_by_id(&self) -> FeatureMatrix {
        self.select_rows(&self.id_order())
    }

    /// Same rows with every value passed through `f(column, value)`.
    pub fn map_values<F: Fn(usize, f64) -> f64>(&self, f: F) -> FeatureMatrix {
        let d = self.n_features().max(1);
        FeatureMatrix {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| f(i % d, v))
                .collect(),
            ..self.clone()
        }
    }

    /// CSV text: optional `# ` comment lines, then
    /// `sample_id,label,<features...>` and one row per sample.
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
        let mut header = vec!["sample_id".to_string(), "label".to_string()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for i in 0..self.n_rows {
            let mut rec = vec![self.sample_ids[i].clone(), self.labels[i].to_string()];
            rec.extend(self.row(i).iter().map(|v| fmt_f64(*v)));
            w.write_record(&rec).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8"));
        out
    }

    pub fn write_csv(&self, path: &Path, comments: &[String]) -> Result<(), FeatureError> {
        write_atomic(path, self.to_csv(comments).as_bytes()).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn from_csv_str(text: &str, origin: &Path) -> Result<Self, FeatureError> {
        let parse_err = |line: usize, msg: String| FeatureError::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = r
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        if header.len() < 2 || &header[0] != "sample_id" || &header[1] != "label" {
            return Err(parse_err(
                1,
                "header must start with sample_id,label".into(),
            ));
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let (mut values, mut labels, mut ids) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| parse_err(i + 2, e.to_string()))?;
            if rec.len() != names.len() + 2 {
                return Err(parse_err(
                    i + 2,
                    format!("expected {} fields, found {}", names.len() + 2, rec.len()),
                ));
            }
            ids.push(rec[0].to_string());
            labels.push(
                rec[1]
                    .parse::<u8>()
                    .map_err(|e| parse_err(i + 2, format!("label: {e}")))?,
            );
            for (j, f) in rec.iter().skip(2).enumerate() {
                values.push(
                    f.parse::<f64>()
                        .map_err(|e| parse_err(i + 2, format!("{}: {e}", names[j])))?,
                );
            }
        }
        Self::from_flat(values, names, labels, ids)
    }

    pub fn read_csv(path: &Path) -> Result<Self, FeatureError> {
        let text = std::fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_str(&text, path)
    }
}

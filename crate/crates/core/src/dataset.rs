//! Labelled feature matrices and their CSV form.
//!
//! A CSV dataset has a header row, one label column and numeric features in
//! every other column. Empty cells and the tokens `NA`, `NaN` and `?` count as
//! missing; rows with any missing value are dropped.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Result, VdaError};
use crate::geometry::LabelCodec;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    x: DMatrix<f64>,
    labels: Vec<usize>,
    codec: LabelCodec,
    feature_names: Vec<String>,
}

impl LabeledDataset {
    /// Builds a dataset from raw label strings; classes are ordered
    /// lexicographically.
    pub fn new<S: AsRef<str>>(x: DMatrix<f64>, labels: &[S]) -> Result<Self> {
        let codec = LabelCodec::from_labels(labels)?;
        let idx = codec.indices(labels)?;
        Self::from_indices(x, idx, codec)
    }

    pub fn from_indices(x: DMatrix<f64>, labels: Vec<usize>, codec: LabelCodec) -> Result<Self> {
        if x.nrows() != labels.len() {
            return Err(VdaError::shape(format!(
                "{} feature rows but {} labels",
                x.nrows(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= codec.n_classes()) {
            return Err(VdaError::UnknownClass(bad.to_string()));
        }
        let feature_names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Ok(Self {
            x,
            labels,
            codec,
            feature_names,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.x.ncols() {
            return Err(VdaError::shape(format!(
                "{} feature names for {} columns",
                names.len(),
                self.x.ncols()
            )));
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn codec(&self) -> &LabelCodec {
        &self.codec
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.codec.n_classes()
    }

    /// Vertex-encoded responses, one row per sample.
    pub fn response(&self) -> DMatrix<f64> {
        self.codec
            .encode_indices(&self.labels)
            .expect("labels are validated on construction")
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows `rows` (in that order), keeping the class codec.
    pub fn subset(&self, rows: &[usize]) -> LabeledDataset {
        LabeledDataset {
            x: self.x.select_rows(rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            codec: self.codec.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Writes the dataset with its label column last.
    pub fn write_csv<W: Write>(&self, writer: W, label_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(label_column);
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for i in 0..self.n_samples() {
            record.clear();
            record.extend(self.x.row(i).iter().map(|v| v.to_string()));
            record.push(self.codec.name(self.labels[i]).to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A dataset read from CSV and the number of rows dropped for missing values.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: LabeledDataset,
    pub dropped: usize,
}

fn is_missing(field: &str) -> bool {
    matches!(field, "" | "NA" | "NaN" | "nan" | "?")
}

/// Reads a labelled dataset from a CSV file.
pub fn ingest_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Ingested> {
    let file = std::fs::File::open(path.as_ref())?;
    read_labeled(file, label_column)
}

/// Reads a labelled dataset from CSV text.
pub fn read_labeled<R: Read>(reader: R, label_column: &str) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let label_at = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| VdaError::input(format!("label column `{label_column}` not found")))?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_at)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0;
    for record in rdr.records() {
        let record = record?;
        let mut row = Vec::with_capacity(names.len());
        let mut missing = false;
        for (j, field) in record.iter().enumerate() {
            if j == label_at {
                missing |= is_missing(field);
                continue;
            }
            if is_missing(field) {
                missing = true;
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(VdaError::input(format!(
                        "column `{}` is not numeric (value `{field}`)",
                        headers.get(j).unwrap_or("?")
                    )))
                }
            }
        }
        if missing {
            dropped += 1;
            continue;
        }
        values.extend(row);
        labels.push(record[label_at].to_string());
    }
    if labels.is_empty() {
        return Err(VdaError::input("no usable rows after dropping missing values"));
    }
    let x = DMatrix::from_row_slice(labels.len(), names.len(), &values);
    let dataset = LabeledDataset::new(x, &labels)?.with_feature_names(names)?;
    Ok(Ingested { dataset, dropped })
}

/// Reads an unlabelled feature matrix, checking the header against
/// `expected` feature names when given. A column named `label_column`, if
/// present, is ignored.
pub fn read_features<R: Read>(reader: R, label_column: Option<&str>) -> Result<(DMatrix<f64>, Vec<String>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let skip = label_column.and_then(|l| headers.iter().position(|h| h == l));
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| Some(j) != skip)
        .map(|(_, h)| h.to_string())
        .collect();
    let mut values = Vec::new();
    let mut rows = 0;
    for record in rdr.records() {
        let record = record?;
        for (j, field) in record.iter().enumerate() {
            if Some(j) == skip {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                VdaError::input(format!(
                    "row {}: column `{}` has non-numeric value `{field}`",
                    rows + 1,
                    headers.get(j).unwrap_or("?")
                ))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    Ok((DMatrix::from_row_slice(rows, names.len(), &values), names))
}

//! Raw tabular datasets and CSV ingestion.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::schema::{Feature, FeatureKind, FeatureSchema};
use crate::error::{Error, Result};

/// A raw cell value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Float(f64),
    Cat(String),
}

impl Value {
    pub fn as_float(&self) -> Option<f64> {
        match self {
            Value::Float(v) => Some(*v),
            Value::Cat(_) => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            Value::Cat(s) => Some(s),
            Value::Float(_) => None,
        }
    }
}

/// Mixed-type tabular dataset with a validated schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: FeatureSchema,
    rows: Vec<Vec<Value>>,
    pub name: String,
}

/// Per-feature type overrides for CSV ingestion.
///
/// The on-disk form is a JSON document `{"features": {"<name>": "continuous"
/// | "categorical"}}`; see the README for details.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SchemaHints {
    #[serde(default)]
    pub features: BTreeMap<String, HintKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HintKind {
    Continuous,
    Categorical,
}

impl Dataset {
    /// Builds a dataset, validating every cell against the schema.
    pub fn new(schema: FeatureSchema, rows: Vec<Vec<Value>>, name: impl Into<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Schema("dataset has no rows".into()));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != schema.n_features() {
                return Err(Error::Schema(format!(
                    "row {r} has {} cells, schema has {} features",
                    row.len(),
                    schema.n_features()
                )));
            }
            for (f, cell) in row.iter().enumerate() {
                let feature = schema.feature(f);
                match (&feature.kind, cell) {
                    (FeatureKind::Continuous, Value::Float(v)) => {
                        if !v.is_finite() {
                            return Err(Error::Schema(format!(
                                "non-finite value in feature '{}' at row {r}",
                                feature.name
                            )));
                        }
                    }
                    (FeatureKind::Categorical(values), Value::Cat(s)) => {
                        if !values.iter().any(|v| v == s) {
                            return Err(Error::Schema(format!(
                                "unseen value '{s}' for categorical feature '{}' at row {r}",
                                feature.name
                            )));
                        }
                    }
                    _ => {
                        return Err(Error::Schema(format!(
                            "type mismatch for feature '{}' at row {r}",
                            feature.name
                        )));
                    }
                }
            }
        }
        Ok(Dataset {
            schema,
            rows,
            name: name.into(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[Value] {
        &self.rows[i]
    }

    /// Dataset with only the given rows (indices may repeat).
    pub fn select_rows(&self, indices: &[usize], name: impl Into<String>) -> Result<Dataset> {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        Dataset::new(self.schema.clone(), rows, name)
    }

    /// Dataset restricted to the named features, keeping schema order.
    pub fn restrict(&self, names: &[String]) -> Result<Dataset> {
        let sub = self.schema.restrict(names)?;
        let keep: Vec<usize> = sub
            .features()
            .iter()
            .map(|f| self.schema.feature_index(&f.name).unwrap())
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|row| keep.iter().map(|&i| row[i].clone()).collect())
            .collect();
        Dataset::new(sub, rows, self.name.clone())
    }

    /// Appends the columns of `other` (same row count, disjoint feature names).
    pub fn concat_columns(&self, other: &Dataset, name: impl Into<String>) -> Result<Dataset> {
        if self.n_rows() != other.n_rows() {
            return Err(Error::Schema("column concat: row counts differ".into()));
        }
        let mut features = self.schema.features().to_vec();
        features.extend(other.schema.features().iter().cloned());
        let schema = FeatureSchema::new(features)?;
        let rows = self
            .rows
            .iter()
            .zip(other.rows.iter())
            .map(|(a, b)| a.iter().chain(b.iter()).cloned().collect())
            .collect();
        Dataset::new(schema, rows, name)
    }

    /// Vertically stacks datasets with identical schemas.
    pub fn concat_rows(parts: &[&Dataset], name: impl Into<String>) -> Result<Dataset> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Schema("concat_rows: no datasets".into()))?;
        let mut rows = Vec::new();
        for p in parts {
            if p.schema != first.schema {
                return Err(Error::Schema(format!(
                    "concat_rows: schema of '{}' differs from '{}'",
                    p.name, first.name
                )));
            }
            rows.extend(p.rows.iter().cloned());
        }
        Dataset::new(first.schema.clone(), rows, name)
    }

    /// Loads a CSV file (RFC-4180-style, header row required), inferring
    /// column types: continuous if every value parses as a number, otherwise
    /// categorical. `hints` overrides inference per feature.
    pub fn from_csv(path: impl AsRef<Path>, hints: &SchemaHints) -> Result<Dataset> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".to_string());
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_path(path)?;
        let headers: Vec<String> = reader
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
            return Err(Error::Schema(format!("{}: missing header row", path.display())));
        }
        let mut cells: Vec<Vec<String>> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            // csv reports ragged rows as errors; add the line number.
            let record = record.map_err(|e| {
                Error::Schema(format!("{}: line {}: {e}", path.display(), i + 2))
            })?;
            let row: Vec<String> = record.iter().map(|c| c.to_string()).collect();
            for (j, cell) in row.iter().enumerate() {
                if cell.trim().is_empty() {
                    return Err(Error::Schema(format!(
                        "{}: line {}: empty cell in column '{}'",
                        path.display(),
                        i + 2,
                        headers[j]
                    )));
                }
            }
            cells.push(row);
        }
        if cells.is_empty() {
            return Err(Error::Schema(format!("{}: no data rows", path.display())));
        }

        let mut features = Vec::with_capacity(headers.len());
        for (j, header) in headers.iter().enumerate() {
            let column: Vec<&str> = cells.iter().map(|r| r[j].as_str()).collect();
            let all_numeric = column.iter().all(|c| c.trim().parse::<f64>().is_ok());
            let kind = match hints.features.get(header) {
                Some(HintKind::Continuous) => {
                    if !all_numeric {
                        let bad = column
                            .iter()
                            .position(|c| c.trim().parse::<f64>().is_err())
                            .unwrap();
                        return Err(Error::Schema(format!(
                            "{}: line {}: feature '{header}' hinted continuous but value '{}' is not numeric",
                            path.display(),
                            bad + 2,
                            column[bad]
                        )));
                    }
                    FeatureKind::Continuous
                }
                Some(HintKind::Categorical) => FeatureKind::Categorical(distinct_sorted(&column)),
                None => {
                    if all_numeric {
                        FeatureKind::Continuous
                    } else {
                        FeatureKind::Categorical(distinct_sorted(&column))
                    }
                }
            };
            features.push(Feature {
                name: header.clone(),
                kind,
            });
        }
        let schema = FeatureSchema::new(features)?;
        let mut rows = Vec::with_capacity(cells.len());
        for (i, raw) in cells.iter().enumerate() {
            let mut row = Vec::with_capacity(raw.len());
            for (j, cell) in raw.iter().enumerate() {
                match &schema.feature(j).kind {
                    FeatureKind::Continuous => {
                        let v = cell.trim().parse::<f64>().map_err(|_| {
                            Error::Schema(format!(
                                "{}: line {}: cell '{cell}' in feature '{}' is not numeric",
                                path.display(),
                                i + 2,
                                headers[j]
                            ))
                        })?;
                        row.push(Value::Float(v));
                    }
                    FeatureKind::Categorical(_) => row.push(Value::Cat(cell.trim().to_string())),
                }
            }
            rows.push(row);
        }
        Dataset::new(schema, rows, name)
    }

    /// Writes the dataset as CSV with a header row. Floats use the shortest
    /// representation that round-trips.
    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        writer.write_record(self.schema.feature_names())?;
        for row in &self.rows {
            let record: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::Float(x) => format!("{x}"),
                    Value::Cat(s) => s.clone(),
                })
                .collect();
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn distinct_sorted(column: &[&str]) -> Vec<String> {
    let mut values: Vec<String> = column.iter().map(|c| c.trim().to_string()).collect();
    values.sort();
    values.dedup();
    values
}

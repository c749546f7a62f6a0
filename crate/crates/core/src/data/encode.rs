//! One-hot encoding of mixed-type data into the model's real-valued input
//! space, with z-normalization of continuous columns.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::data::dataset::{Dataset, Value};
use crate::data::schema::{FeatureKind, FeatureSchema};
use crate::error::{Error, Result};

/// Mean/std pair used to z-normalize one continuous feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContStats {
    pub mean: f64,
    pub std: f64,
}

/// Normalization statistics, one entry per feature (None for categorical).
///
/// Stats are recorded at encode time and stored inside trained models so
/// that inference on new data reuses the training-time scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub per_feature: Vec<Option<ContStats>>,
}

impl Normalization {
    pub fn stats_for(&self, feature_idx: usize) -> Option<&ContStats> {
        self.per_feature.get(feature_idx).and_then(|s| s.as_ref())
    }
}

/// Encoded dataset: `M x D` real matrix plus the schema and normalization
/// stats needed to decode it again.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodedMatrix {
    pub values: Array2<f64>,
    pub schema: FeatureSchema,
    pub norm: Normalization,
}

impl EncodedMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Per-column means of the encoded matrix (categorical blocks give the
    /// empirical category frequencies).
    pub fn column_means(&self) -> Array1<f64> {
        let m = self.values.nrows() as f64;
        self.values.sum_axis(ndarray::Axis(0)) / m
    }

    /// Decodes back to raw feature values (argmax for categorical blocks,
    /// de-normalization for continuous columns).
    pub fn decode(&self, name: impl Into<String>) -> Result<Dataset> {
        decode_matrix(&self.values, &self.schema, &self.norm, name)
    }
}

/// Encodes a dataset, computing fresh normalization stats from the data.
///
/// Continuous columns are z-normalized; categorical cells expand to one-hot
/// blocks. A constant continuous column is rejected as a degenerate feature.
pub fn encode_dataset(d: &Dataset) -> Result<EncodedMatrix> {
    let norm = compute_normalization(d)?;
    encode_dataset_with(d, &norm)
}

/// Encodes a dataset using previously recorded normalization stats.
pub fn encode_dataset_with(d: &Dataset, norm: &Normalization) -> Result<EncodedMatrix> {
    let schema = &d.schema;
    if norm.per_feature.len() != schema.n_features() {
        return Err(Error::Schema(format!(
            "normalization covers {} features, schema has {}",
            norm.per_feature.len(),
            schema.n_features()
        )));
    }
    let dim = schema.encoded_dim();
    let mut values = Array2::<f64>::zeros((d.n_rows(), dim));
    for (r, row) in d.rows().iter().enumerate() {
        for (f, cell) in row.iter().enumerate() {
            let range = schema.encoded_range(f);
            match (&schema.feature(f).kind, cell) {
                (FeatureKind::Continuous, Value::Float(v)) => {
                    let stats = norm.stats_for(f).ok_or_else(|| {
                        Error::Schema(format!(
                            "missing normalization stats for continuous feature '{}'",
                            schema.feature(f).name
                        ))
                    })?;
                    values[[r, range.start]] = (v - stats.mean) / stats.std;
                }
                (FeatureKind::Categorical(vals), Value::Cat(s)) => {
                    let pos = vals.iter().position(|v| v == s).ok_or_else(|| {
                        Error::Schema(format!(
                            "unseen value '{s}' for categorical feature '{}' at row {r}",
                            schema.feature(f).name
                        ))
                    })?;
                    values[[r, range.start + pos]] = 1.0;
                }
                _ => {
                    return Err(Error::Schema(format!(
                        "type mismatch for feature '{}' at row {r}",
                        schema.feature(f).name
                    )));
                }
            }
        }
    }
    Ok(EncodedMatrix {
        values,
        schema: schema.clone(),
        norm: norm.clone(),
    })
}

/// Computes z-normalization stats (population std) for continuous features.
pub fn compute_normalization(d: &Dataset) -> Result<Normalization> {
    let schema = &d.schema;
    let m = d.n_rows() as f64;
    let mut per_feature = Vec::with_capacity(schema.n_features());
    for f in 0..schema.n_features() {
        match &schema.feature(f).kind {
            FeatureKind::Continuous => {
                let mut sum = 0.0;
                for row in d.rows() {
                    sum += row[f].as_float().unwrap();
                }
                let mean = sum / m;
                let mut ss = 0.0;
                for row in d.rows() {
                    let delta = row[f].as_float().unwrap() - mean;
                    ss += delta * delta;
                }
                let std = (ss / m).sqrt();
                if std < 1e-12 {
                    return Err(Error::Schema(format!(
                        "degenerate feature '{}': constant continuous column (std 0)",
                        schema.feature(f).name
                    )));
                }
                per_feature.push(Some(ContStats { mean, std }));
            }
            FeatureKind::Categorical(_) => per_feature.push(None),
        }
    }
    Ok(Normalization { per_feature })
}

/// Decodes an arbitrary real matrix in the schema's encoded space back to
/// raw values: continuous columns are de-normalized, categorical blocks
/// decode to the argmax category.
pub fn decode_matrix(
    values: &Array2<f64>,
    schema: &FeatureSchema,
    norm: &Normalization,
    name: impl Into<String>,
) -> Result<Dataset> {
    if values.ncols() != schema.encoded_dim() {
        return Err(Error::Schema(format!(
            "matrix has {} columns, schema encodes to {}",
            values.ncols(),
            schema.encoded_dim()
        )));
    }
    let mut rows = Vec::with_capacity(values.nrows());
    for r in 0..values.nrows() {
        let mut row = Vec::with_capacity(schema.n_features());
        for f in 0..schema.n_features() {
            let range = schema.encoded_range(f);
            match &schema.feature(f).kind {
                FeatureKind::Continuous => {
                    let stats = norm.stats_for(f).ok_or_else(|| {
                        Error::Schema(format!(
                            "missing normalization stats for feature '{}'",
                            schema.feature(f).name
                        ))
                    })?;
                    row.push(Value::Float(values[[r, range.start]] * stats.std + stats.mean));
                }
                FeatureKind::Categorical(vals) => {
                    let block = values.row(r);
                    let mut best = range.start;
                    for c in range.clone() {
                        if block[c] > block[best] {
                            best = c;
                        }
                    }
                    row.push(Value::Cat(vals[best - range.start].clone()));
                }
            }
        }
        rows.push(row);
    }
    Dataset::new(schema.clone(), rows, name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::Feature;
    use approx::assert_abs_diff_eq;

    fn mixed_dataset() -> Dataset {
        let schema = FeatureSchema::new(vec![
            Feature::continuous("x"),
            Feature::categorical("c", &["a", "b"]),
        ])
        .unwrap();
        Dataset::new(
            schema,
            vec![
                vec![Value::Float(5.0), Value::Cat("b".into())],
                vec![Value::Float(1.0), Value::Cat("a".into())],
                vec![Value::Float(3.0), Value::Cat("b".into())],
            ],
            "mixed",
        )
        .unwrap()
    }

    #[test]
    fn one_hot_block_for_row() {
        let d = mixed_dataset();
        let e = encode_dataset(&d).unwrap();
        assert_eq!(e.dim(), 3);
        // row 0 has c = "b" with values ["a", "b"]: block is (0, 1)
        assert_eq!(e.values[[0, 1]], 0.0);
        assert_eq!(e.values[[0, 2]], 1.0);
    }

    #[test]
    fn continuous_columns_are_z_normalized() {
        let d = mixed_dataset();
        let e = encode_dataset(&d).unwrap();
        let col = e.values.column(0);
        let mean: f64 = col.iter().sum::<f64>() / col.len() as f64;
        let var: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / col.len() as f64;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(var.sqrt(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn decode_round_trips() {
        let d = mixed_dataset();
        let e = encode_dataset(&d).unwrap();
        let back = e.decode("back").unwrap();
        for (orig, rt) in d.rows().iter().zip(back.rows()) {
            match (&orig[0], &rt[0]) {
                (Value::Float(a), Value::Float(b)) => assert_abs_diff_eq!(a, b, epsilon = 1e-9),
                _ => panic!("expected floats"),
            }
            assert_eq!(orig[1], rt[1]);
        }
    }

    #[test]
    fn constant_column_is_degenerate() {
        let schema = FeatureSchema::new(vec![Feature::continuous("x")]).unwrap();
        let d = Dataset::new(
            schema,
            vec![vec![Value::Float(2.0)], vec![Value::Float(2.0)]],
            "const",
        )
        .unwrap();
        let err = encode_dataset(&d).unwrap_err();
        assert!(err.to_string().contains("degenerate feature"), "{err}");
    }

    #[test]
    fn encode_is_deterministic() {
        let d = mixed_dataset();
        let a = encode_dataset(&d).unwrap();
        let b = encode_dataset(&d).unwrap();
        assert_eq!(a.values, b.values);
    }
}

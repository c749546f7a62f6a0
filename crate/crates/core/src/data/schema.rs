//! Feature schemas for mixed-type tabular data and their mapping into the
//! encoded real-valued input space.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kind of a tabular feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureKind {
    Continuous,
    /// Categorical with its ordered list of admissible values.
    Categorical(Vec<String>),
}

impl FeatureKind {
    /// Number of encoded columns this feature occupies.
    pub fn encoded_width(&self) -> usize {
        match self {
            FeatureKind::Continuous => 1,
            FeatureKind::Categorical(values) => values.len(),
        }
    }
}

/// A named feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
}

impl Feature {
    pub fn continuous(name: impl Into<String>) -> Self {
        Feature {
            name: name.into(),
            kind: FeatureKind::Continuous,
        }
    }

    pub fn categorical(name: impl Into<String>, values: &[&str]) -> Self {
        Feature {
            name: name.into(),
            kind: FeatureKind::Categorical(values.iter().map(|v| v.to_string()).collect()),
        }
    }
}

/// Ordered feature list plus the derived encoding map: feature index to a
/// contiguous column range in the encoded space.
///
/// The encoded dimension `D` is the number of continuous features plus the
/// sum of categorical cardinalities; the per-feature ranges partition
/// `[0, D)` in feature order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    features: Vec<Feature>,
    /// Start offset of each feature's encoded block; last entry is `D`.
    offsets: Vec<usize>,
}

impl FeatureSchema {
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Schema("schema has no features".into()));
        }
        let mut seen = BTreeSet::new();
        for f in &features {
            if !seen.insert(f.name.clone()) {
                return Err(Error::Schema(format!("duplicate feature name '{}'", f.name)));
            }
            if let FeatureKind::Categorical(values) = &f.kind {
                if values.is_empty() {
                    return Err(Error::Schema(format!(
                        "categorical feature '{}' has an empty value list",
                        f.name
                    )));
                }
                let distinct: BTreeSet<_> = values.iter().collect();
                if distinct.len() != values.len() {
                    return Err(Error::Schema(format!(
                        "categorical feature '{}' has duplicate values",
                        f.name
                    )));
                }
            }
        }
        let mut offsets = Vec::with_capacity(features.len() + 1);
        let mut at = 0;
        for f in &features {
            offsets.push(at);
            at += f.kind.encoded_width();
        }
        offsets.push(at);
        Ok(FeatureSchema { features, offsets })
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    /// Total encoded dimension `D`.
    pub fn encoded_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn feature(&self, idx: usize) -> &Feature {
        &self.features[idx]
    }

    /// Encoded column range of feature `idx`.
    pub fn encoded_range(&self, idx: usize) -> Range<usize> {
        self.offsets[idx]..self.offsets[idx + 1]
    }

    /// Feature owning encoded column `col`.
    pub fn feature_of_column(&self, col: usize) -> usize {
        debug_assert!(col < self.encoded_dim());
        match self.offsets.binary_search(&col) {
            Ok(i) if i < self.features.len() => i,
            Ok(i) => i - 1,
            Err(i) => i - 1,
        }
    }

    /// Schema restricted to `names`, keeping this schema's feature order.
    pub fn restrict(&self, names: &[String]) -> Result<FeatureSchema> {
        let wanted: BTreeSet<&str> = names.iter().map(|s| s.as_str()).collect();
        for n in &wanted {
            if self.feature_index(n).is_none() {
                return Err(Error::Schema(format!("feature '{n}' not present in schema")));
            }
        }
        let kept: Vec<Feature> = self
            .features
            .iter()
            .filter(|f| wanted.contains(f.name.as_str()))
            .cloned()
            .collect();
        FeatureSchema::new(kept)
    }
}

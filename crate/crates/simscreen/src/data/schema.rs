use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kind of a raw feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureKind {
    Continuous,
    Categorical { categories: Vec<String> },
}

impl FeatureKind {
    pub fn is_categorical(&self) -> bool {
        matches!(self, FeatureKind::Categorical { .. })
    }

    pub fn category_count(&self) -> usize {
        match self {
            FeatureKind::Continuous => 0,
            FeatureKind::Categorical { categories } => categories.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetKind {
    Regression,
    BinaryClass,
}

/// Ordered feature descriptions plus the target kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub features: Vec<(String, FeatureKind)>,
    pub target_kind: TargetKind,
}

impl FeatureSchema {
    pub fn new(features: Vec<(String, FeatureKind)>, target_kind: TargetKind) -> Self {
        debug_assert!(
            {
                let mut names: Vec<&str> = features.iter().map(|(n, _)| n.as_str()).collect();
                names.sort_unstable();
                names.windows(2).all(|w| w[0] != w[1])
            },
            "feature names must be unique"
        );
        debug_assert!(
            features
                .iter()
                .all(|(_, k)| !k.is_categorical() || k.category_count() >= 2),
            "categorical features must list at least two categories"
        );
        FeatureSchema {
            features,
            target_kind,
        }
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn continuous_count(&self) -> usize {
        self.features
            .iter()
            .filter(|(_, k)| !k.is_categorical())
            .count()
    }

    pub fn categorical_count(&self) -> usize {
        self.features.len() - self.continuous_count()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|(n, _)| n == name)
    }

    /// Width of the one-hot encoded representation.
    pub fn encoded_width(&self) -> usize {
        self.features
            .iter()
            .map(|(_, k)| match k {
                FeatureKind::Continuous => 1,
                FeatureKind::Categorical { categories } => categories.len(),
            })
            .sum()
    }
}

/// In-memory tabular dataset. Categorical cells hold the category index
/// as a float; continuous cells hold the raw value. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularDataset {
    pub schema: FeatureSchema,
    pub rows: Array2<f64>,
    pub targets: Vec<f64>,
}

impl TabularDataset {
    pub fn new(schema: FeatureSchema, rows: Array2<f64>, targets: Vec<f64>) -> Result<Self> {
        if rows.nrows() != targets.len() {
            return Err(Error::WidthMismatch {
                expected: rows.nrows(),
                found: targets.len(),
            });
        }
        if rows.ncols() != schema.feature_count() {
            return Err(Error::WidthMismatch {
                expected: schema.feature_count(),
                found: rows.ncols(),
            });
        }
        for (j, (name, kind)) in schema.features.iter().enumerate() {
            if let FeatureKind::Categorical { categories } = kind {
                for (i, v) in rows.column(j).iter().enumerate() {
                    let idx = *v as usize;
                    if idx >= categories.len() || *v < 0.0 || v.fract() != 0.0 {
                        let _ = i;
                        return Err(Error::UnknownCategory {
                            feature: name.clone(),
                            index: *v as usize,
                            count: categories.len(),
                        });
                    }
                }
            }
        }
        Ok(TabularDataset {
            schema,
            rows,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dataset restricted to `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> TabularDataset {
        let d = self.rows.ncols();
        let mut rows = Array2::zeros((indices.len(), d));
        let mut targets = Vec::with_capacity(indices.len());
        for (out, &i) in indices.iter().enumerate() {
            rows.row_mut(out).assign(&self.rows.row(i));
            targets.push(self.targets[i]);
        }
        TabularDataset {
            schema: self.schema.clone(),
            rows,
            targets,
        }
    }
}

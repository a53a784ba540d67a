//! Loader for the UCI Adult census income CSV layout.
//!
//! Expects the exact 15-column layout of the UCI distribution (14
//! features + income), comma separated, optional header, `?` as the
//! missing-value marker. The `fnlwgt` sampling-weight column is dropped
//! and rows containing `?` are dropped; everything else is kept raw.

use std::path::Path;

use ndarray::Array2;

use crate::data::schema::{FeatureKind, FeatureSchema, TabularDataset, TargetKind};
use crate::error::{Error, Result};

pub const ADULT_COLUMNS: [&str; 15] = [
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
];

/// Column indices (into the 15-column layout) that hold continuous values.
const CONTINUOUS: [usize; 6] = [0, 2, 4, 10, 11, 12];
const FNLWGT: usize = 2;
const INCOME: usize = 14;

pub fn load_adult_csv(path: impl AsRef<Path>) -> Result<TabularDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|_| Error::FileNotFound(path.display().to_string()))?;
    parse_adult(&text)
}

pub fn parse_adult(text: &str) -> Result<TabularDataset> {
    let mut kept: Vec<Vec<String>> = Vec::new();
    for (row_idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        if row_idx == 0 && fields.first().map(|f| f.as_str()) == Some("age") {
            continue; // header
        }
        if fields.len() != ADULT_COLUMNS.len() {
            return Err(Error::MalformedRow {
                row: row_idx,
                expected: ADULT_COLUMNS.len(),
                found: fields.len(),
            });
        }
        if fields.iter().any(|f| f == "?") {
            continue;
        }
        kept.push(fields);
    }

    // Category vocabularies, sorted for a file-order-independent schema.
    let cat_cols: Vec<usize> = (0..INCOME)
        .filter(|c| !CONTINUOUS.contains(c) && *c != FNLWGT)
        .collect();
    let mut vocab: Vec<Vec<String>> = vec![Vec::new(); ADULT_COLUMNS.len()];
    for &c in &cat_cols {
        let mut values: Vec<String> = kept.iter().map(|r| r[c].clone()).collect();
        values.sort_unstable();
        values.dedup();
        vocab[c] = values;
    }

    let feature_cols: Vec<usize> = (0..INCOME).filter(|&c| c != FNLWGT).collect();
    let features: Vec<(String, FeatureKind)> = feature_cols
        .iter()
        .map(|&c| {
            let kind = if CONTINUOUS.contains(&c) {
                FeatureKind::Continuous
            } else {
                FeatureKind::Categorical {
                    categories: vocab[c].clone(),
                }
            };
            (ADULT_COLUMNS[c].to_string(), kind)
        })
        .collect();
    let schema = FeatureSchema::new(features, TargetKind::BinaryClass);

    let mut rows = Array2::zeros((kept.len(), feature_cols.len()));
    let mut targets = Vec::with_capacity(kept.len());
    for (i, fields) in kept.iter().enumerate() {
        for (j, &c) in feature_cols.iter().enumerate() {
            rows[[i, j]] = if CONTINUOUS.contains(&c) {
                fields[c].parse::<f64>().map_err(|_| Error::MalformedRow {
                    row: i,
                    expected: ADULT_COLUMNS.len(),
                    found: fields.len(),
                })?
            } else {
                vocab[c].iter().position(|v| v == &fields[c]).unwrap() as f64
            };
        }
        // adult.test writes income with a trailing period.
        let income = fields[INCOME].trim_end_matches('.');
        targets.push(if income == ">50K" { 1.0 } else { 0.0 });
    }

    TabularDataset::new(schema, rows, targets)
}

//! One-hot encoding and min-max scaling.
//!
//! Categorical values live as indices inside [`TabularDataset`]; the
//! encoded representation (one column per category, continuous columns
//! passed through, everything min-max scaled) is produced only at model
//! and agent boundaries.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::data::schema::{FeatureKind, TabularDataset};
use crate::error::{Error, Result};

/// Fitted encoding parameters: the encoded column range of every raw
/// feature and the per-encoded-column (min, max) learned at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingMaps {
    /// Per raw feature, the half-open `[start, end)` encoded column range.
    pub one_hot_groups: Vec<(usize, usize)>,
    /// Per encoded column, the (min, max) seen at fit time. Empty until
    /// a scaler has been fitted.
    pub scale_params: Vec<(f64, f64)>,
}

impl EncodingMaps {
    pub fn encoded_width(&self) -> usize {
        self.one_hot_groups.last().map_or(0, |&(_, end)| end)
    }

    /// Scale a single raw continuous value using the fitted params of
    /// encoded column `col`. Constant columns map to 0.
    pub fn scale_value(&self, col: usize, v: f64) -> f64 {
        let (lo, hi) = self.scale_params[col];
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.0
        }
    }
}

/// One-hot encode a dataset according to its schema. Each categorical
/// feature expands to one column per category with exactly one 1 per row;
/// continuous columns pass through unchanged.
pub fn one_hot_encode(ds: &TabularDataset) -> Result<(Array2<f64>, EncodingMaps)> {
    let groups = schema_groups(&ds.schema);
    let width = groups.last().map_or(0, |&(_, end)| end);
    let mut out = Array2::zeros((ds.len(), width));
    for (j, (_, kind)) in ds.schema.features.iter().enumerate() {
        let (start, _) = groups[j];
        match kind {
            FeatureKind::Continuous => {
                for (i, v) in ds.rows.column(j).iter().enumerate() {
                    out[[i, start]] = *v;
                }
            }
            FeatureKind::Categorical { categories } => {
                for (i, v) in ds.rows.column(j).iter().enumerate() {
                    let idx = *v as usize;
                    if idx >= categories.len() {
                        return Err(Error::UnknownCategory {
                            feature: ds.schema.features[j].0.clone(),
                            index: idx,
                            count: categories.len(),
                        });
                    }
                    out[[i, start + idx]] = 1.0;
                }
            }
        }
    }
    Ok((
        out,
        EncodingMaps {
            one_hot_groups: groups,
            scale_params: Vec::new(),
        },
    ))
}

/// Encode a single raw row with maps produced by [`one_hot_encode`].
pub fn one_hot_encode_row(
    row: &[f64],
    schema: &crate::data::schema::FeatureSchema,
    maps: &EncodingMaps,
) -> Result<Array1<f64>> {
    if row.len() != schema.feature_count() {
        return Err(Error::WidthMismatch {
            expected: schema.feature_count(),
            found: row.len(),
        });
    }
    let mut out = Array1::zeros(maps.encoded_width());
    for (j, (name, kind)) in schema.features.iter().enumerate() {
        let (start, _) = maps.one_hot_groups[j];
        match kind {
            FeatureKind::Continuous => out[start] = row[j],
            FeatureKind::Categorical { categories } => {
                let idx = row[j] as usize;
                if idx >= categories.len() {
                    return Err(Error::UnknownCategory {
                        feature: name.clone(),
                        index: idx,
                        count: categories.len(),
                    });
                }
                out[start + idx] = 1.0;
            }
        }
    }
    Ok(out)
}

/// Invert [`one_hot_encode`]: recover the raw category-index matrix.
pub fn one_hot_decode(
    encoded: &Array2<f64>,
    schema: &crate::data::schema::FeatureSchema,
    maps: &EncodingMaps,
) -> Array2<f64> {
    let mut out = Array2::zeros((encoded.nrows(), schema.feature_count()));
    for (j, (_, kind)) in schema.features.iter().enumerate() {
        let (start, end) = maps.one_hot_groups[j];
        match kind {
            FeatureKind::Continuous => {
                for i in 0..encoded.nrows() {
                    out[[i, j]] = encoded[[i, start]];
                }
            }
            FeatureKind::Categorical { .. } => {
                for i in 0..encoded.nrows() {
                    let mut best = start;
                    for c in start..end {
                        if encoded[[i, c]] > encoded[[i, best]] {
                            best = c;
                        }
                    }
                    out[[i, j]] = (best - start) as f64;
                }
            }
        }
    }
    out
}

/// Min-max scale a matrix. With `maps = None` this fits per-column
/// (min, max) and returns them; with fitted maps it applies the stored
/// params without clipping, so out-of-range values land outside [0, 1].
/// Constant columns map to 0.
pub fn minmax_scale(
    matrix: &Array2<f64>,
    maps: Option<&EncodingMaps>,
    groups: &[(usize, usize)],
) -> Result<(Array2<f64>, EncodingMaps)> {
    let params: Vec<(f64, f64)> = match maps {
        Some(m) => {
            if m.scale_params.len() != matrix.ncols() {
                return Err(Error::WidthMismatch {
                    expected: m.scale_params.len(),
                    found: matrix.ncols(),
                });
            }
            m.scale_params.clone()
        }
        None => (0..matrix.ncols())
            .map(|c| {
                let col = matrix.column(c);
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            })
            .collect(),
    };
    let mut out = matrix.clone();
    for (c, &(lo, hi)) in params.iter().enumerate() {
        let denom = hi - lo;
        for v in out.column_mut(c).iter_mut() {
            *v = if denom > 0.0 { (*v - lo) / denom } else { 0.0 };
        }
    }
    Ok((
        out,
        EncodingMaps {
            one_hot_groups: groups.to_vec(),
            scale_params: params,
        },
    ))
}

/// Maps that one-hot encode but leave values unscaled ((0, 1) scale
/// params are the identity map). Used where min-max scaling would leak
/// per-example information, like the saddle-point pipelines.
pub fn identity_maps(schema: &crate::data::schema::FeatureSchema) -> EncodingMaps {
    let groups = schema_groups(schema);
    let width = groups.last().map_or(0, |&(_, end)| end);
    EncodingMaps {
        one_hot_groups: groups,
        scale_params: vec![(0.0, 1.0); width],
    }
}

/// Fit the full preprocessing pipeline (one-hot then min-max) on a
/// dataset, returning the transformed matrix and the fitted maps.
pub fn fit_pipeline(ds: &TabularDataset) -> Result<(Array2<f64>, EncodingMaps)> {
    let (encoded, maps) = one_hot_encode(ds)?;
    minmax_scale(&encoded, None, &maps.one_hot_groups)
}

/// Apply fitted maps to a dataset (one-hot then scale, no refit).
pub fn apply_pipeline(ds: &TabularDataset, maps: &EncodingMaps) -> Result<Array2<f64>> {
    let (encoded, enc_maps) = one_hot_encode(ds)?;
    if enc_maps.one_hot_groups != maps.one_hot_groups {
        return Err(Error::LayoutMismatch(
            "one-hot groups differ from fitted maps".into(),
        ));
    }
    let (scaled, _) = minmax_scale(&encoded, Some(maps), &maps.one_hot_groups)?;
    Ok(scaled)
}

/// Apply fitted maps to a single raw row.
pub fn apply_pipeline_row(
    row: &[f64],
    schema: &crate::data::schema::FeatureSchema,
    maps: &EncodingMaps,
) -> Result<Array1<f64>> {
    let mut enc = one_hot_encode_row(row, schema, maps)?;
    for (c, v) in enc.iter_mut().enumerate() {
        let (lo, hi) = maps.scale_params[c];
        *v = if hi > lo { (*v - lo) / (hi - lo) } else { 0.0 };
    }
    Ok(enc)
}

fn schema_groups(schema: &crate::data::schema::FeatureSchema) -> Vec<(usize, usize)> {
    let mut groups = Vec::with_capacity(schema.feature_count());
    let mut cursor = 0;
    for (_, kind) in &schema.features {
        let width = match kind {
            FeatureKind::Continuous => 1,
            FeatureKind::Categorical { categories } => categories.len(),
        };
        groups.push((cursor, cursor + width));
        cursor += width;
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::{FeatureSchema, TargetKind};
    use ndarray::array;

    fn cat_cont_schema() -> FeatureSchema {
        FeatureSchema::new(
            vec![
                (
                    "a".into(),
                    FeatureKind::Categorical {
                        categories: vec!["x".into(), "y".into(), "z".into()],
                    },
                ),
                ("b".into(), FeatureKind::Continuous),
            ],
            TargetKind::Regression,
        )
    }

    #[test]
    fn one_hot_width_and_groups() {
        let ds = TabularDataset::new(
            cat_cont_schema(),
            array![[0.0, 1.5], [2.0, -3.0]],
            vec![0.0, 1.0],
        )
        .unwrap();
        let (enc, maps) = one_hot_encode(&ds).unwrap();
        assert_eq!(enc.ncols(), 4);
        assert_eq!(maps.one_hot_groups, vec![(0, 3), (3, 4)]);
        assert_eq!(enc.row(0).to_vec(), vec![1.0, 0.0, 0.0, 1.5]);
        assert_eq!(enc.row(1).to_vec(), vec![0.0, 0.0, 1.0, -3.0]);
    }

    #[test]
    fn all_continuous_is_identity() {
        let schema = FeatureSchema::new(
            vec![
                ("u".into(), FeatureKind::Continuous),
                ("v".into(), FeatureKind::Continuous),
            ],
            TargetKind::Regression,
        );
        let rows = array![[1.0, 2.0], [3.0, 4.0]];
        let ds = TabularDataset::new(schema, rows.clone(), vec![0.0, 0.0]).unwrap();
        let (enc, _) = one_hot_encode(&ds).unwrap();
        assert_eq!(enc, rows);
    }

    #[test]
    fn unknown_category_on_transform() {
        let schema = cat_cont_schema();
        let ds = TabularDataset::new(schema.clone(), array![[0.0, 1.0]], vec![0.0]).unwrap();
        let (_, maps) = one_hot_encode(&ds).unwrap();
        let err = one_hot_encode_row(&[5.0, 1.0], &schema, &maps).unwrap_err();
        assert!(matches!(err, Error::UnknownCategory { index: 5, .. }));
    }

    #[test]
    fn decode_round_trip() {
        let ds = TabularDataset::new(
            cat_cont_schema(),
            array![[0.0, 1.5], [2.0, -3.0], [1.0, 0.25]],
            vec![0.0, 1.0, 0.0],
        )
        .unwrap();
        let (enc, maps) = one_hot_encode(&ds).unwrap();
        let decoded = one_hot_decode(&enc, &ds.schema, &maps);
        assert_eq!(decoded, ds.rows);
    }

    #[test]
    fn minmax_basic() {
        let m = array![[2.0], [4.0], [6.0]];
        let (scaled, maps) = minmax_scale(&m, None, &[(0, 1)]).unwrap();
        assert_eq!(scaled.column(0).to_vec(), vec![0.0, 0.5, 1.0]);
        assert_eq!(maps.scale_params, vec![(2.0, 6.0)]);
    }

    #[test]
    fn minmax_constant_column_maps_to_zero() {
        let m = array![[5.0], [5.0], [5.0]];
        let (scaled, _) = minmax_scale(&m, None, &[(0, 1)]).unwrap();
        assert!(scaled.column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn minmax_transform_does_not_clip() {
        let m = array![[2.0], [6.0]];
        let (_, maps) = minmax_scale(&m, None, &[(0, 1)]).unwrap();
        let (scaled, _) = minmax_scale(&array![[8.0]], Some(&maps), &[(0, 1)]).unwrap();
        assert_eq!(scaled[[0, 0]], 1.5);
    }
}

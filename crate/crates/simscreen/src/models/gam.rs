//! Generalized additive model fitted by cyclic gradient boosting of
//! one-feature piecewise-constant shape functions.
//!
//! Each boosting round visits every feature once, fits the current
//! residual with a binned step function of that feature (Newton update
//! per bin for the logistic link), and adds a damped copy into the
//! feature's shape. Continuous features use equal-frequency bins,
//! categorical features one bin per category. After fitting, shapes are
//! centered to zero mean over the training data with the mean absorbed
//! into the intercept, so per-feature contributions are comparable.

use serde::{Deserialize, Serialize};

use crate::data::schema::{FeatureKind, TabularDataset, TargetKind};
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GamLink {
    Identity,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamParams {
    pub max_bins: usize,
    pub rounds: usize,
    pub learning_rate: f64,
}

impl Default for GamParams {
    fn default() -> Self {
        GamParams {
            max_bins: 32,
            rounds: 200,
            learning_rate: 0.1,
        }
    }
}

/// Shape function of one raw feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ShapeFn {
    /// Piecewise constant over bins delimited by strictly increasing
    /// interior edges; values outside the outermost edges take the end
    /// bins.
    Binned { edges: Vec<f64>, values: Vec<f64> },
    /// One value per category index.
    Categorical { values: Vec<f64> },
}

impl ShapeFn {
    pub fn lookup(&self, v: f64) -> f64 {
        match self {
            ShapeFn::Binned { edges, values } => {
                let bin = edges.partition_point(|&e| v >= e);
                values[bin]
            }
            ShapeFn::Categorical { values } => values[v as usize],
        }
    }

    fn bin_count(&self) -> usize {
        match self {
            ShapeFn::Binned { values, .. } => values.len(),
            ShapeFn::Categorical { values } => values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamModel {
    pub intercept: f64,
    pub link: GamLink,
    pub shapes: Vec<ShapeFn>,
}

impl GamModel {
    /// The additive score `intercept + sum_j shape_j(x_j)`. For the
    /// logistic link this is the log-odds; [`gam_predict`] applies the
    /// link on top.
    pub fn score(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.shapes.len() {
            return Err(Error::WidthMismatch {
                expected: self.shapes.len(),
                found: row.len(),
            });
        }
        let mut s = self.intercept;
        for (shape, &v) in self.shapes.iter().zip(row) {
            s += shape.lookup(v);
        }
        Ok(s)
    }
}

pub fn gam_predict(model: &GamModel, row: &[f64]) -> Result<f64> {
    let s = model.score(row)?;
    Ok(match model.link {
        GamLink::Identity => s,
        GamLink::Logistic => 1.0 / (1.0 + (-s).exp()),
    })
}

/// Fit on raw rows (categorical cells are category indices). `rng` is
/// accepted for interface uniformity; the cyclic fit draws nothing.
pub fn fit_gam(train: &TabularDataset, params: &GamParams, _rng: RngStream) -> Result<GamModel> {
    let n = train.len();
    if n < 2 {
        return Err(Error::EmptyData { min: 2 });
    }
    let d = train.schema.feature_count();
    let y = &train.targets;
    let link = match train.schema.target_kind {
        TargetKind::Regression => GamLink::Identity,
        TargetKind::BinaryClass => GamLink::Logistic,
    };

    // Bin layout per feature plus the per-row bin index, computed once.
    let mut shapes: Vec<ShapeFn> = Vec::with_capacity(d);
    let mut bin_of: Vec<Vec<u32>> = Vec::with_capacity(d);
    for (j, (_, kind)) in train.schema.features.iter().enumerate() {
        match kind {
            FeatureKind::Categorical { categories } => {
                shapes.push(ShapeFn::Categorical {
                    values: vec![0.0; categories.len()],
                });
                bin_of.push(train.rows.column(j).iter().map(|&v| v as u32).collect());
            }
            FeatureKind::Continuous => {
                let edges = equal_frequency_edges(train.rows.column(j).to_vec(), params.max_bins);
                let shape = ShapeFn::Binned {
                    values: vec![0.0; edges.len() + 1],
                    edges,
                };
                bin_of.push(
                    train
                        .rows
                        .column(j)
                        .iter()
                        .map(|&v| match &shape {
                            ShapeFn::Binned { edges, .. } => {
                                edges.partition_point(|&e| v >= e) as u32
                            }
                            _ => unreachable!(),
                        })
                        .collect(),
                );
                shapes.push(shape);
            }
        }
    }

    let mean = y.iter().sum::<f64>() / n as f64;
    let mut intercept = match link {
        GamLink::Identity => mean,
        GamLink::Logistic => {
            let p = mean.clamp(1e-6, 1.0 - 1e-6);
            (p / (1.0 - p)).ln()
        }
    };
    let mut score = vec![intercept; n];

    let mut grad_sum: Vec<f64> = Vec::new();
    let mut hess_sum: Vec<f64> = Vec::new();
    for _ in 0..params.rounds {
        for j in 0..d {
            let bins = shapes[j].bin_count();
            grad_sum.clear();
            grad_sum.resize(bins, 0.0);
            hess_sum.clear();
            hess_sum.resize(bins, 0.0);
            for i in 0..n {
                let (g, h) = match link {
                    GamLink::Identity => (y[i] - score[i], 1.0),
                    GamLink::Logistic => {
                        let p = 1.0 / (1.0 + (-score[i]).exp());
                        (y[i] - p, (p * (1.0 - p)).max(1e-12))
                    }
                };
                let b = bin_of[j][i] as usize;
                grad_sum[b] += g;
                hess_sum[b] += h;
            }
            let deltas: Vec<f64> = grad_sum
                .iter()
                .zip(&hess_sum)
                .map(|(&g, &h)| {
                    if h > 0.0 {
                        params.learning_rate * g / h.max(1e-12)
                    } else {
                        0.0
                    }
                })
                .collect();
            match &mut shapes[j] {
                ShapeFn::Binned { values, .. } | ShapeFn::Categorical { values } => {
                    for (v, dl) in values.iter_mut().zip(&deltas) {
                        *v += dl;
                    }
                }
            }
            for i in 0..n {
                score[i] += deltas[bin_of[j][i] as usize];
            }
        }
    }

    // Center shapes over the training data.
    for j in 0..d {
        let mut counts = vec![0u32; shapes[j].bin_count()];
        for &b in &bin_of[j] {
            counts[b as usize] += 1;
        }
        let (mean_j, values) = match &mut shapes[j] {
            ShapeFn::Binned { values, .. } | ShapeFn::Categorical { values } => {
                let total: f64 = values
                    .iter()
                    .zip(&counts)
                    .map(|(&v, &c)| v * c as f64)
                    .sum();
                (total / n as f64, values)
            }
        };
        for v in values.iter_mut() {
            *v -= mean_j;
        }
        intercept += mean_j;
    }

    Ok(GamModel {
        intercept,
        link,
        shapes,
    })
}

/// Interior edges for equal-frequency binning, deduplicated. Edges sit at
/// midpoints between neighbouring order statistics so no data value lies
/// exactly on an edge unless values repeat.
fn equal_frequency_edges(mut values: Vec<f64>, max_bins: usize) -> Vec<f64> {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    let bins = max_bins.clamp(1, n.max(1));
    let mut edges = Vec::new();
    for b in 1..bins {
        let rank = (n * b) / bins;
        if rank == 0 || rank >= n {
            continue;
        }
        let edge = 0.5 * (values[rank - 1] + values[rank]);
        if values[rank - 1] < values[rank] && edges.last().map_or(true, |&e| edge > e) {
            edges.push(edge);
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::{FeatureKind, FeatureSchema, TargetKind};
    use ndarray::Array2;
    use rand::Rng;

    fn cont_schema(d: usize, target: TargetKind) -> FeatureSchema {
        FeatureSchema::new(
            (0..d)
                .map(|j| (format!("f{j}"), FeatureKind::Continuous))
                .collect(),
            target,
        )
    }

    #[test]
    fn constant_target_collapses_to_intercept() {
        let rows = Array2::from_shape_fn((50, 2), |(i, j)| (i * 3 + j) as f64);
        let ds = TabularDataset::new(
            cont_schema(2, TargetKind::Regression),
            rows,
            vec![4.5; 50],
        )
        .unwrap();
        let m = fit_gam(&ds, &GamParams::default(), RngStream::new(0, 0)).unwrap();
        assert!((m.intercept - 4.5).abs() < 1e-9);
        for shape in &m.shapes {
            match shape {
                ShapeFn::Binned { values, .. } | ShapeFn::Categorical { values } => {
                    assert!(values.iter().all(|v| v.abs() <= 1e-6));
                }
            }
        }
    }

    #[test]
    fn recovers_additive_components() {
        // y = 2 x0 + x1^2 on uniform [0,1]^2. Centered truth for shape 0
        // is 2x - 1; tolerance 0.1 at bin midpoints.
        let n = 4000;
        let mut rng = RngStream::new(11, 0).rng();
        let rows = Array2::from_shape_fn((n, 2), |_| rng.gen::<f64>());
        let y: Vec<f64> = (0..n).map(|i| 2.0 * rows[[i, 0]] + rows[[i, 1]].powi(2)).collect();
        let ds =
            TabularDataset::new(cont_schema(2, TargetKind::Regression), rows, y).unwrap();
        let m = fit_gam(&ds, &GamParams::default(), RngStream::new(0, 0)).unwrap();
        if let ShapeFn::Binned { edges, values } = &m.shapes[0] {
            let mut mids = vec![0.5 * edges[0]];
            for w in edges.windows(2) {
                mids.push(0.5 * (w[0] + w[1]));
            }
            mids.push(0.5 * (edges[edges.len() - 1] + 1.0));
            for (mid, v) in mids.iter().zip(values) {
                let truth = 2.0 * mid - 1.0;
                assert!(
                    (v - truth).abs() < 0.1,
                    "shape0({mid}) = {v}, want {truth}"
                );
            }
        } else {
            panic!("expected binned shape");
        }
    }

    #[test]
    fn prediction_is_exact_sum_of_lookups() {
        let n = 200;
        let rows = Array2::from_shape_fn((n, 3), |(i, j)| ((i * 7 + j * 3) % 13) as f64);
        let y: Vec<f64> = (0..n).map(|i| (i % 4) as f64).collect();
        let ds =
            TabularDataset::new(cont_schema(3, TargetKind::Regression), rows.clone(), y).unwrap();
        let m = fit_gam(&ds, &GamParams::default(), RngStream::new(0, 0)).unwrap();
        for i in 0..n {
            let row = rows.row(i);
            let row = row.as_slice().unwrap();
            let direct = gam_predict(&m, row).unwrap();
            let summed = m
                .shapes
                .iter()
                .zip(row)
                .fold(m.intercept, |acc, (s, &v)| acc + s.lookup(v));
            assert_eq!(direct, summed);
        }
    }

    #[test]
    fn out_of_range_values_clamp_to_end_bins() {
        let shape = ShapeFn::Binned {
            edges: vec![1.0, 2.0],
            values: vec![10.0, 20.0, 30.0],
        };
        assert_eq!(shape.lookup(-5.0), 10.0);
        assert_eq!(shape.lookup(1.5), 20.0);
        assert_eq!(shape.lookup(99.0), 30.0);
    }

    #[test]
    fn width_mismatch_rejected() {
        let rows = Array2::zeros((4, 2));
        let ds = TabularDataset::new(
            cont_schema(2, TargetKind::Regression),
            rows,
            vec![0.0; 4],
        )
        .unwrap();
        let m = fit_gam(&ds, &GamParams::default(), RngStream::new(0, 0)).unwrap();
        assert!(gam_predict(&m, &[1.0, 2.0, 3.0]).is_err());
    }
}

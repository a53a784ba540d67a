//! Data-bug corruption and the global data-bugs use case: did the base
//! model train on a corrupted dataset?
//!
//! Every example subsamples its own base dataset, flips a fair coin for
//! bug application (the coin is the label), retrains a base model and
//! draws a set of points with predictions and explanations. Corruption
//! happens on raw values before one-hot encoding and scaling, the same
//! place a real imputation bug would live.

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::encode::{apply_pipeline_row, fit_pipeline};
use crate::data::schema::{TabularDataset, TargetKind};
use crate::data::split::subsample;
use crate::error::{Error, Result};
use crate::explain::encode::{encode_observation, Explanation, UseCaseKind};
use crate::explain::gam_local::gam_local;
use crate::explain::lime::{lime_explain, LimeConfig};
use crate::explain::shap::shap_auto;
use crate::models::gam::{fit_gam, gam_predict, GamParams};
use crate::models::gbm::{fit_gbm_grouped, gbm_predict, GbmParams};
use crate::rng::{permutation, RngStream};
use crate::usecase::counterfactual::column_stds;
use crate::usecase::types::{AgentDataset, AgentExample, ExplanationSetting, Provenance};

/// The value the missing-values bug imputes into `age` (the feature's
/// mean in the census data).
pub const IMPUTED_AGE: f64 = 38.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BugKind {
    /// Among rows with the positive (>50k) target, a `strength` share
    /// gets its raw age replaced by the mean value 38.
    MissingValues { strength: f64 },
    /// Appends a copy of `source`; a `strength` share of rows keeps the
    /// true copy, the rest draw from the source column's empirical
    /// distribution. Strength 0 is the bug-free counterpart: the column
    /// is still there, fully randomized.
    RedundantFeature { strength: f64, source: String },
}

impl BugKind {
    pub fn strength(&self) -> f64 {
        match self {
            BugKind::MissingValues { strength } => *strength,
            BugKind::RedundantFeature { strength, .. } => *strength,
        }
    }

    pub fn with_strength(&self, strength: f64) -> BugKind {
        match self {
            BugKind::MissingValues { .. } => BugKind::MissingValues { strength },
            BugKind::RedundantFeature { source, .. } => BugKind::RedundantFeature {
                strength,
                source: source.clone(),
            },
        }
    }
}

/// Corrupt a raw dataset. Deterministic for the stream.
pub fn apply_bug(ds: &TabularDataset, bug: &BugKind, rng: RngStream) -> Result<TabularDataset> {
    match bug {
        BugKind::MissingValues { strength } => {
            assert!((0.0..=1.0).contains(strength));
            let age = ds
                .schema
                .feature_index("age")
                .ok_or_else(|| Error::MissingFeature("age".into()))?;
            if ds.schema.target_kind != TargetKind::BinaryClass {
                return Err(Error::ConfigInvalid {
                    path: "bug".into(),
                    message: "missing-values bug needs the binary >50k target".into(),
                });
            }
            let positives: Vec<usize> =
                (0..ds.len()).filter(|&i| ds.targets[i] == 1.0).collect();
            let n_hit = (strength * positives.len() as f64).round() as usize;
            let order = permutation(positives.len(), rng);
            let mut rows = ds.rows.clone();
            for &slot in order.iter().take(n_hit) {
                rows[[positives[slot], age]] = IMPUTED_AGE;
            }
            TabularDataset::new(ds.schema.clone(), rows, ds.targets.clone())
        }
        BugKind::RedundantFeature { strength, source } => {
            assert!((0.0..=1.0).contains(strength));
            let src = ds
                .schema
                .feature_index(source)
                .ok_or_else(|| Error::MissingFeature(source.clone()))?;
            let n = ds.len();
            let n_copy = (strength * n as f64).round() as usize;
            let order = permutation(n, rng.child(0));
            let copied: std::collections::HashSet<usize> =
                order.iter().take(n_copy).copied().collect();
            let mut draw = rng.child(1).rng();
            let source_col = ds.rows.column(src).to_vec();
            let duplicate: Vec<f64> = (0..n)
                .map(|i| {
                    if copied.contains(&i) {
                        source_col[i]
                    } else {
                        source_col[draw.gen_range(0..n)]
                    }
                })
                .collect();

            let mut features = ds.schema.features.clone();
            features.push((format!("{source}-copy"), ds.schema.features[src].1.clone()));
            let schema = crate::data::schema::FeatureSchema::new(features, ds.schema.target_kind);
            let mut rows = Array2::zeros((n, ds.schema.feature_count() + 1));
            rows.slice_mut(ndarray::s![.., ..ds.schema.feature_count()])
                .assign(&ds.rows);
            for (i, v) in duplicate.iter().enumerate() {
                rows[[i, ds.schema.feature_count()]] = *v;
            }
            TabularDataset::new(schema, rows, ds.targets.clone())
        }
    }
}

#[derive(Debug, Clone)]
pub struct DataBugsConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub set_size: usize,
    pub subsample_size: usize,
    pub bug: BugKind,
    pub gbm: GbmParams,
    pub gam: GamParams,
    pub lime: LimeConfig,
    pub shap_background: usize,
    pub shap_perms: usize,
}

impl Default for DataBugsConfig {
    fn default() -> Self {
        DataBugsConfig {
            n_train: 300,
            n_test: 100,
            set_size: 1,
            subsample_size: 4000,
            bug: BugKind::MissingValues { strength: 0.3 },
            gbm: GbmParams::classification(),
            gam: GamParams::default(),
            lime: LimeConfig::default(),
            shap_background: 20,
            shap_perms: 128,
        }
    }
}

pub fn gen_data_bugs(
    base: &TabularDataset,
    cfg: &DataBugsConfig,
    setting: ExplanationSetting,
    rng: RngStream,
) -> Result<AgentDataset> {
    if setting == ExplanationSetting::Anchors {
        return Err(Error::ConfigInvalid {
            path: "explanation_settings".into(),
            message: "the data-bugs study pairs only attribution explanations and the \
                      model-prediction baseline"
                .into(),
        });
    }
    if cfg.subsample_size > base.len() {
        return Err(Error::TooLarge {
            requested: cfg.subsample_size,
            available: base.len(),
        });
    }
    assert!(cfg.set_size >= 1);
    let total = cfg.n_train + cfg.n_test;

    let examples: Result<Vec<AgentExample>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let stream = rng.child(i as u64);
            let subsampled = subsample(base, cfg.subsample_size, stream.child(0))?;
            let bugged = stream.child(1).rng().gen_bool(0.5);
            let strength = if bugged { cfg.bug.strength() } else { 0.0 };
            let d_i = apply_bug(&subsampled, &cfg.bug.with_strength(strength), stream.child(2))?;
            let schema = &d_i.schema;

            let (enc, maps) = fit_pipeline(&d_i)?;
            enum Base {
                Gbm(crate::models::gbm::GbmModel),
                Gam(crate::models::gam::GamModel),
            }
            let model = match setting {
                ExplanationSetting::Gam => Base::Gam(fit_gam(&d_i, &cfg.gam, stream.child(3))?),
                _ => Base::Gbm(fit_gbm_grouped(
                    &enc,
                    &d_i.targets,
                    &maps.one_hot_groups,
                    &cfg.gbm,
                    stream.child(3),
                )?),
            };
            let predict_enc = |row: &[f64]| -> f64 {
                match &model {
                    Base::Gbm(m) => gbm_predict(m, row).unwrap(),
                    Base::Gam(_) => unreachable!(),
                }
            };

            let background: Vec<Vec<f64>> = if setting == ExplanationSetting::Shapley {
                permutation(d_i.len(), stream.child(4))
                    .iter()
                    .take(cfg.shap_background)
                    .map(|&r| enc.row(r).to_vec())
                    .collect()
            } else {
                Vec::new()
            };
            let col_std = if setting == ExplanationSetting::Surrogate {
                column_stds(&enc)
            } else {
                Vec::new()
            };

            let picks = permutation(d_i.len(), stream.child(5));
            let mut observations = Vec::with_capacity(cfg.set_size);
            for j in 0..cfg.set_size {
                let row_idx = picks[j % picks.len()];
                let x_raw = d_i.rows.row(row_idx).to_vec();
                let point_stream = stream.child(6).child(j as u64);
                let (pred, expl) = match &model {
                    Base::Gam(gam) => (
                        gam_predict(gam, &x_raw)?,
                        Some(Explanation::Gam(gam_local(gam, &x_raw)?)),
                    ),
                    Base::Gbm(_) => {
                        let x_enc = apply_pipeline_row(&x_raw, schema, &maps)?;
                        let p = predict_enc(x_enc.as_slice().unwrap());
                        let expl = match setting {
                            ExplanationSetting::Surrogate => {
                                Some(Explanation::Surrogate(lime_explain(
                                    &predict_enc,
                                    x_enc.as_slice().unwrap(),
                                    &col_std,
                                    &cfg.lime,
                                    point_stream.child(0),
                                )?))
                            }
                            ExplanationSetting::Shapley => Some(Explanation::Shapley(shap_auto(
                                &predict_enc,
                                x_enc.as_slice().unwrap(),
                                &background,
                                &maps.one_hot_groups,
                                cfg.shap_perms,
                                point_stream.child(1),
                            )?)),
                            ExplanationSetting::Baseline => None,
                            _ => unreachable!(),
                        };
                        (p, expl)
                    }
                };
                observations.push(encode_observation(
                    UseCaseKind::DataBugs,
                    &x_raw,
                    Some(pred),
                    expl.as_ref(),
                    schema,
                    &maps,
                )?);
            }
            Ok(AgentExample {
                observations,
                label: bugged as u8,
            })
        })
        .collect();

    let mut examples = examples?;
    let test = examples.split_off(cfg.n_train);
    AgentDataset::assemble(
        examples,
        test,
        Provenance {
            use_case: "data_bugs".into(),
            setting: setting.name().into(),
            generator_digest: String::new(),
            seed: rng.seed,
        },
    )
}

/// Two-sample Kolmogorov-Smirnov statistic, used by tests to confirm the
/// corruption actually shifts the age distribution.
#[cfg(test)]
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut xs: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xs.dedup();
    let cdf = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
    xs.iter()
        .map(|&t| (cdf(a, t) - cdf(b, t)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::adult::parse_adult;
    use crate::data::synthetic::synthetic_adult_csv;

    fn base() -> TabularDataset {
        parse_adult(&synthetic_adult_csv(1500, RngStream::new(21, 0))).unwrap()
    }

    #[test]
    fn zero_strength_missing_values_is_identity() {
        let ds = base();
        let out = apply_bug(
            &ds,
            &BugKind::MissingValues { strength: 0.0 },
            RngStream::new(1, 0),
        )
        .unwrap();
        assert_eq!(ds, out);
    }

    #[test]
    fn full_strength_hits_every_positive_row() {
        let ds = base();
        let age = ds.schema.feature_index("age").unwrap();
        let out = apply_bug(
            &ds,
            &BugKind::MissingValues { strength: 1.0 },
            RngStream::new(1, 0),
        )
        .unwrap();
        for i in 0..out.len() {
            if out.targets[i] == 1.0 {
                assert_eq!(out.rows[[i, age]], IMPUTED_AGE);
            }
        }
    }

    #[test]
    fn corruption_shifts_the_age_distribution() {
        let ds = base();
        let age = ds.schema.feature_index("age").unwrap();
        let bugged = apply_bug(
            &ds,
            &BugKind::MissingValues { strength: 0.3 },
            RngStream::new(2, 0),
        )
        .unwrap();
        let positives = |d: &TabularDataset| -> Vec<f64> {
            (0..d.len())
                .filter(|&i| d.targets[i] == 1.0)
                .map(|i| d.rows[[i, age]])
                .collect()
        };
        let ks = ks_statistic(&positives(&ds), &positives(&bugged));
        assert!(ks > 0.0, "ks {ks}");
    }

    #[test]
    fn full_strength_duplicate_is_perfectly_correlated() {
        let ds = base();
        let out = apply_bug(
            &ds,
            &BugKind::RedundantFeature {
                strength: 1.0,
                source: "education-num".into(),
            },
            RngStream::new(3, 0),
        )
        .unwrap();
        let src = out.schema.feature_index("education-num").unwrap();
        let dup = out.schema.feature_index("education-num-copy").unwrap();
        let a = out.rows.column(src);
        let b = out.rows.column(dup);
        let n = out.len() as f64;
        let (ma, mb) = (a.sum() / n, b.sum() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        let pearson = cov / (va.sqrt() * vb.sqrt());
        assert!((pearson - 1.0).abs() < 1e-12, "pearson {pearson}");
    }

    #[test]
    fn missing_source_feature_errors() {
        let ds = base();
        assert!(matches!(
            apply_bug(
                &ds,
                &BugKind::RedundantFeature {
                    strength: 0.5,
                    source: "no-such-feature".into()
                },
                RngStream::new(1, 0)
            ),
            Err(Error::MissingFeature(_))
        ));
    }

    fn quick_cfg() -> DataBugsConfig {
        DataBugsConfig {
            n_train: 6,
            n_test: 2,
            set_size: 3,
            subsample_size: 700,
            gbm: GbmParams {
                n_trees: 15,
                ..GbmParams::classification()
            },
            lime: LimeConfig {
                n_samples: 100,
                ..LimeConfig::default()
            },
            shap_perms: 4,
            ..DataBugsConfig::default()
        }
    }

    #[test]
    fn every_example_has_the_set_size_and_shared_layout() {
        let ds = gen_data_bugs(
            &base(),
            &quick_cfg(),
            ExplanationSetting::Baseline,
            RngStream::new(5, 0),
        )
        .unwrap();
        assert_eq!(ds.train.len(), 6);
        assert_eq!(ds.test.len(), 2);
        for e in ds.train.iter().chain(ds.test.iter()) {
            assert_eq!(e.observations.len(), 3);
        }
    }

    #[test]
    fn redundant_feature_keeps_one_layout_for_both_labels() {
        let cfg = DataBugsConfig {
            bug: BugKind::RedundantFeature {
                strength: 0.9,
                source: "education-num".into(),
            },
            ..quick_cfg()
        };
        let ds = gen_data_bugs(
            &base(),
            &cfg,
            ExplanationSetting::Baseline,
            RngStream::new(6, 0),
        )
        .unwrap();
        let labels: std::collections::HashSet<u8> =
            ds.train.iter().map(|e| e.label).collect();
        assert!(labels.len() > 1, "want both labels in 6 coin flips");
    }

    #[test]
    fn set_size_slicing_matches_regeneration() {
        let big = quick_cfg();
        let mut small = quick_cfg();
        small.set_size = 1;
        let a = gen_data_bugs(&base(), &big, ExplanationSetting::Baseline, RngStream::new(7, 0))
            .unwrap();
        let b = gen_data_bugs(&base(), &small, ExplanationSetting::Baseline, RngStream::new(7, 0))
            .unwrap();
        assert_eq!(a.slice_set_size(1).train, b.train);
    }
}

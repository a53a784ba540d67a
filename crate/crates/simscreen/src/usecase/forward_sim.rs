//! Forward-simulation data generation: predict the base model's output
//! class for a data-point.
//!
//! One base model is trained on the train split of the base dataset;
//! agent training examples come from the train split and evaluation
//! examples from the unseen validation split. The label is the model's
//! predicted class, so observations carry no separate prediction span.

use rayon::prelude::*;

use crate::data::encode::{apply_pipeline_row, fit_pipeline};
use crate::data::schema::{TabularDataset, TargetKind};
use crate::data::split::split;
use crate::error::{Error, Result};
use crate::explain::anchors::{anchors_explain, AnchorConfig};
use crate::explain::encode::{encode_observation, Explanation, UseCaseKind};
use crate::explain::gam_local::gam_local;
use crate::explain::lime::{lime_explain, LimeConfig};
use crate::explain::shap::shap_auto;
use crate::models::gam::{fit_gam, gam_predict, GamParams};
use crate::models::gbm::{fit_gbm_grouped, gbm_predict, GbmParams};
use crate::rng::{permutation, RngStream};
use crate::usecase::counterfactual::column_stds;
use crate::usecase::types::{AgentDataset, AgentExample, ExplanationSetting, Provenance};

#[derive(Debug, Clone)]
pub struct ForwardSimConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub split_fractions: (f64, f64, f64),
    pub gbm: GbmParams,
    pub gam: GamParams,
    pub lime: LimeConfig,
    pub anchors: AnchorConfig,
    pub shap_background: usize,
    pub shap_perms: usize,
}

impl Default for ForwardSimConfig {
    fn default() -> Self {
        ForwardSimConfig {
            n_train: 1000,
            n_test: 250,
            split_fractions: (0.7, 0.15, 0.15),
            gbm: GbmParams::classification(),
            gam: GamParams::default(),
            lime: LimeConfig::default(),
            anchors: AnchorConfig::default(),
            shap_background: 20,
            shap_perms: 128,
        }
    }
}

pub fn gen_forward_sim(
    base: &TabularDataset,
    cfg: &ForwardSimConfig,
    setting: ExplanationSetting,
    rng: RngStream,
) -> Result<AgentDataset> {
    if base.schema.target_kind != TargetKind::BinaryClass {
        return Err(Error::ConfigInvalid {
            path: "use_case".into(),
            message: "forward simulation needs a binary-class base dataset".into(),
        });
    }
    let (train, val, _held_out) = split(base, cfg.split_fractions, rng.child(0))?;
    if cfg.n_train > train.len() {
        return Err(Error::SplitExhausted {
            split: "train".into(),
            need: cfg.n_train,
            have: train.len(),
        });
    }
    if cfg.n_test > val.len() {
        return Err(Error::SplitExhausted {
            split: "validation".into(),
            need: cfg.n_test,
            have: val.len(),
        });
    }

    let schema = &train.schema;
    let (train_enc, maps) = fit_pipeline(&train)?;

    enum Base {
        Gbm(crate::models::gbm::GbmModel),
        Gam(crate::models::gam::GamModel),
    }
    let model = match setting {
        ExplanationSetting::Gam => Base::Gam(fit_gam(&train, &cfg.gam, rng.child(1))?),
        _ => Base::Gbm(fit_gbm_grouped(
            &train_enc,
            &train.targets,
            &maps.one_hot_groups,
            &cfg.gbm,
            rng.child(1),
        )?),
    };
    // Probability of the positive class for an encoded row; only ever
    // called in GBM settings (the GAM setting explains itself locally).
    let predict_enc = |row: &[f64]| -> f64 {
        match &model {
            Base::Gbm(m) => gbm_predict(m, row).unwrap(),
            Base::Gam(_) => unreachable!("encoded-space prediction in a gam setting"),
        }
    };

    let background: Vec<Vec<f64>> = {
        let order = permutation(train.len(), rng.child(2));
        order
            .iter()
            .take(cfg.shap_background)
            .map(|&r| train_enc.row(r).to_vec())
            .collect()
    };
    let col_std = column_stds(&train_enc);

    let train_order = permutation(train.len(), rng.child(3));
    let val_order = permutation(val.len(), rng.child(4));

    let build = |source: &TabularDataset, row_idx: usize, example_tag: u64| -> Result<AgentExample> {
        let stream = rng.child(10).child(example_tag);
        let x_raw = source.rows.row(row_idx).to_vec();
        let x_enc = apply_pipeline_row(&x_raw, schema, &maps)?;
        let (label, expl) = match (&model, setting) {
            (Base::Gam(gam), _) => {
                let p = gam_predict(gam, &x_raw)?;
                (
                    (p >= 0.5) as u8,
                    Some(Explanation::Gam(gam_local(gam, &x_raw)?)),
                )
            }
            (Base::Gbm(_), s) => {
                let p = predict_enc(x_enc.as_slice().unwrap());
                let expl = match s {
                    ExplanationSetting::Surrogate => Some(Explanation::Surrogate(lime_explain(
                        &predict_enc,
                        x_enc.as_slice().unwrap(),
                        &col_std,
                        &cfg.lime,
                        stream.child(0),
                    )?)),
                    ExplanationSetting::Shapley => Some(Explanation::Shapley(shap_auto(
                        &predict_enc,
                        x_enc.as_slice().unwrap(),
                        &background,
                        &maps.one_hot_groups,
                        cfg.shap_perms,
                        stream.child(1),
                    )?)),
                    ExplanationSetting::Anchors => Some(Explanation::Anchor(anchors_explain(
                        &predict_enc,
                        &x_raw,
                        &train,
                        &maps,
                        &cfg.anchors,
                        stream.child(2),
                    )?)),
                    ExplanationSetting::Baseline => None,
                    ExplanationSetting::Gam => unreachable!(),
                };
                ((p >= 0.5) as u8, expl)
            }
        };
        let obs = encode_observation(UseCaseKind::ForwardSim, &x_raw, None, expl.as_ref(), schema, &maps)?;
        Ok(AgentExample {
            observations: vec![obs],
            label,
        })
    };

    let train_examples: Result<Vec<AgentExample>> = (0..cfg.n_train)
        .into_par_iter()
        .map(|e| build(&train, train_order[e], e as u64))
        .collect();
    let test_examples: Result<Vec<AgentExample>> = (0..cfg.n_test)
        .into_par_iter()
        .map(|e| build(&val, val_order[e], (1 << 32) + e as u64))
        .collect();

    AgentDataset::assemble(
        train_examples?,
        test_examples?,
        Provenance {
            use_case: "forward_sim".into(),
            setting: setting.name().into(),
            generator_digest: String::new(),
            seed: rng.seed,
        },
    )
}

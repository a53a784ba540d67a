//! Fast property suite behind the `verify` subcommand. Each check is an
//! independent invariant of the pipeline; all of them together run in
//! well under two minutes.

use ndarray::Array2;
use rand::Rng;

use crate::agent::network::{init_deepset, Pooling};
use crate::agent::{deepset_forward, grad_check};
use crate::data::encode::fit_pipeline;
use crate::data::schema::{FeatureKind, FeatureSchema, TabularDataset, TargetKind};
use crate::explain::anchors::{anchors_explain, AnchorConfig};
use crate::explain::encode::{EncodedObservation, ObservationLayout};
use crate::explain::lime::{lime_explain, LimeConfig};
use crate::explain::shap::{shap_exact, shap_sampled};
use crate::models::gam::{fit_gam, GamParams};
use crate::models::gbm::{fit_gbm, gbm_predict, GbmParams};
use crate::rng::RngStream;
use crate::usecase::types::{AgentExample, ExplanationSetting};

use super::config::{ExperimentConfig, Sweep, SweepAxis, UseCaseConfig};
use super::runner::run_experiment;

pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn property_suite() -> Vec<PropertyResult> {
    vec![
        shapley_efficiency(),
        shapley_sampled_close_to_exact(),
        surrogate_linear_recovery(),
        gam_sum_identity(),
        deepset_permutation_invariance(),
        gradient_check(),
        anchors_self_satisfaction(),
        report_determinism(),
    ]
}

fn result(name: &'static str, passed: bool, detail: String) -> PropertyResult {
    PropertyResult {
        name,
        passed,
        detail,
    }
}

fn random_gbm(seed: u64, d: usize, n: usize) -> crate::models::gbm::GbmModel {
    let mut rng = RngStream::new(seed, 0).rng();
    let x = Array2::from_shape_fn((n, d), |_| rng.gen::<f64>());
    let y: Vec<f64> = (0..n)
        .map(|i| {
            (x[[i, 0]] * 4.0).sin() + x[[i, 1 % d]] * x[[i, (d - 1).min(2)]] * 2.0
                + rng.gen::<f64>() * 0.1
        })
        .collect();
    let params = GbmParams {
        n_trees: 30,
        ..GbmParams::regression()
    };
    fit_gbm(&x, &y, &params, RngStream::new(0, 0)).unwrap()
}

fn shapley_efficiency() -> PropertyResult {
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let d = 3 + (trial % 3) as usize;
        let model = random_gbm(trial, d, 120);
        let predict = |r: &[f64]| gbm_predict(&model, r).unwrap();
        let mut rng = RngStream::new(trial, 1).rng();
        let background: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let groups: Vec<(usize, usize)> = (0..d).map(|j| (j, j + 1)).collect();
        let got = shap_exact(&predict, &x, &background, &groups).unwrap();
        let gap = (got.base_value + got.values.iter().sum::<f64>() - predict(&x)).abs();
        worst = worst.max(gap);
    }
    result(
        "shapley efficiency (100 random triples, tol 1e-8)",
        worst <= 1e-8,
        format!("max |base + sum - f(x)| = {worst:.3e}"),
    )
}

fn shapley_sampled_close_to_exact() -> PropertyResult {
    let model = random_gbm(7, 4, 200);
    let predict = |r: &[f64]| gbm_predict(&model, r).unwrap();
    let mut rng = RngStream::new(8, 0).rng();
    let background: Vec<Vec<f64>> = (0..10)
        .map(|_| (0..4).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let groups: Vec<(usize, usize)> = (0..4).map(|j| (j, j + 1)).collect();
    let mut worst = 0.0f64;
    for trial in 0..5u64 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen::<f64>()).collect();
        let exact = shap_exact(&predict, &x, &background, &groups).unwrap();
        let sampled =
            shap_sampled(&predict, &x, &background, &groups, 256, RngStream::new(trial, 2))
                .unwrap();
        for (a, b) in exact.values.iter().zip(&sampled.values) {
            worst = worst.max((a - b).abs());
        }
    }
    result(
        "sampled shapley vs exact (256 permutations, tol 0.05)",
        worst <= 0.05,
        format!("max deviation = {worst:.4}"),
    )
}

fn surrogate_linear_recovery() -> PropertyResult {
    let f = |r: &[f64]| 3.0 * r[0] - 2.0 * r[1] + 0.5 * r[2];
    let truth = [3.0, -2.0, 0.5];
    let got = lime_explain(
        &f,
        &[0.4, -0.2, 0.9],
        &[1.0, 1.0, 1.0],
        &LimeConfig::default(),
        RngStream::new(3, 0),
    )
    .unwrap();
    let worst = got
        .weights
        .iter()
        .zip(truth)
        .map(|(w, t)| (w - t).abs())
        .fold(0.0, f64::max);
    result(
        "surrogate linear recovery (tol 0.1)",
        worst <= 0.1,
        format!("max coefficient error = {worst:.4}"),
    )
}

fn gam_sum_identity() -> PropertyResult {
    let mut rng = RngStream::new(5, 0).rng();
    let rows = Array2::from_shape_fn((800, 3), |_| rng.gen::<f64>());
    let y: Vec<f64> = (0..800)
        .map(|i| rows[[i, 0]] * 2.0 + rows[[i, 1]].powi(2) - rows[[i, 2]])
        .collect();
    let schema = FeatureSchema::new(
        (0..3)
            .map(|j| (format!("f{j}"), FeatureKind::Continuous))
            .collect(),
        TargetKind::Regression,
    );
    let ds = TabularDataset::new(schema, rows, y).unwrap();
    let model = fit_gam(&ds, &GamParams::default(), RngStream::new(0, 0)).unwrap();
    let mut exact = true;
    for i in (0..ds.len()).step_by(37) {
        let row = ds.rows.row(i);
        let row = row.as_slice().unwrap();
        let local = crate::explain::gam_local(&model, row).unwrap();
        let total = local
            .contributions
            .iter()
            .fold(local.intercept, |acc, c| acc + c);
        if total != model.score(row).unwrap() {
            exact = false;
        }
    }
    result(
        "gam local sum identity (exact)",
        exact,
        if exact { "holds bit-for-bit".into() } else { "violated".into() },
    )
}

fn deepset_permutation_invariance() -> PropertyResult {
    let params = init_deepset(6, Pooling::Sum, RngStream::new(4, 0));
    let layout = ObservationLayout {
        spans: vec![("data-point".into(), 6)],
    };
    let mut rng = RngStream::new(9, 0).rng();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let obs: Vec<EncodedObservation> = (0..5)
            .map(|_| EncodedObservation {
                vector: (0..6).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
                layout: layout.clone(),
            })
            .collect();
        let example = AgentExample {
            observations: obs.clone(),
            label: 0,
        };
        let mut rotated = obs;
        rotated.rotate_left(2);
        rotated.swap(0, 3);
        let permuted = AgentExample {
            observations: rotated,
            label: 0,
        };
        let a = deepset_forward(&params, &example).unwrap();
        let b = deepset_forward(&params, &permuted).unwrap();
        worst = worst.max((a - b).abs());
    }
    result(
        "set network permutation invariance (tol 1e-6)",
        worst <= 1e-6,
        format!("max deviation = {worst:.3e}"),
    )
}

fn gradient_check() -> PropertyResult {
    let layout = ObservationLayout {
        spans: vec![("data-point".into(), 4)],
    };
    let mut worst = 0.0f64;
    for trial in 0..20u64 {
        let params = init_deepset(4, Pooling::Sum, RngStream::new(trial, 3));
        let mut rng = RngStream::new(trial, 4).rng();
        let example = AgentExample {
            observations: (0..3)
                .map(|_| EncodedObservation {
                    vector: (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
                    layout: layout.clone(),
                })
                .collect(),
            label: (trial % 2) as u8,
        };
        let err = grad_check(&params, &example, (trial % 2) as f64).unwrap();
        worst = worst.max(err);
    }
    result(
        "backprop gradient check (20 configurations, tol 1e-4)",
        worst <= 1e-4,
        format!("max relative error = {worst:.3e}"),
    )
}

fn anchors_self_satisfaction() -> PropertyResult {
    let mut rng = RngStream::new(11, 0).rng();
    let rows = Array2::from_shape_fn((600, 3), |_| rng.gen::<f64>());
    let schema = FeatureSchema::new(
        (0..3)
            .map(|j| (format!("f{j}"), FeatureKind::Continuous))
            .collect(),
        TargetKind::BinaryClass,
    );
    let targets: Vec<f64> = (0..600)
        .map(|i| (rows[[i, 0]] + rows[[i, 1]] > 1.0) as u8 as f64)
        .collect();
    let ds = TabularDataset::new(schema, rows, targets).unwrap();
    let (enc, maps) = fit_pipeline(&ds).unwrap();
    let model = fit_gbm(
        &enc,
        &ds.targets,
        &GbmParams {
            n_trees: 40,
            ..GbmParams::classification()
        },
        RngStream::new(0, 0),
    )
    .unwrap();
    let predict = |r: &[f64]| gbm_predict(&model, r).unwrap();
    let mut all_satisfied = true;
    for trial in 0..50u64 {
        let mut rng = RngStream::new(trial, 5).rng();
        let x: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
        let rule = anchors_explain(
            &predict,
            &x,
            &ds,
            &maps,
            &AnchorConfig {
                n_eval_samples: 200,
                ..AnchorConfig::default()
            },
            RngStream::new(trial, 6),
        )
        .unwrap();
        if !rule.satisfied_by(&x) {
            all_satisfied = false;
        }
    }
    result(
        "anchors self-satisfaction (50 random points)",
        all_satisfied,
        if all_satisfied {
            "every explained point satisfies its rule".into()
        } else {
            "violation found".into()
        },
    )
}

fn report_determinism() -> PropertyResult {
    let cfg = ExperimentConfig {
        use_case: UseCaseConfig::Counterfactual,
        explanation_settings: vec![ExplanationSetting::Baseline, ExplanationSetting::Surrogate],
        sweep: Sweep {
            axis: SweepAxis::TrainSize,
            values: vec![4.0, 8.0],
        },
        seeds: vec![1, 2],
        generator: super::config::GeneratorConfig {
            n_test: Some(8),
            base_train_size: 300,
            ..Default::default()
        },
        base_model: super::config::BaseModelConfig {
            gbm_trees: 25,
            ..Default::default()
        },
        explainer: super::config::ExplainerConfig {
            lime_samples: 150,
            ..Default::default()
        },
        agent: super::config::AgentConfig {
            epochs: Some(8),
            ..Default::default()
        },
        data: Default::default(),
        cache_dir: None,
        output_dir: None,
    };
    let a = run_experiment(&cfg);
    let b = run_experiment(&cfg);
    match (a, b) {
        (Ok(a), Ok(b)) => {
            let bytes_a = format!("{}{}", a.to_csv(), a.to_table_text());
            let bytes_b = format!("{}{}", b.to_csv(), b.to_table_text());
            let json_a = serde_json::to_string(&a).unwrap();
            let json_b = serde_json::to_string(&b).unwrap();
            let same = bytes_a == bytes_b && json_a == json_b;
            result(
                "end-to-end report determinism (two runs, identical bytes)",
                same,
                if same {
                    "csv, table and json all byte-identical".into()
                } else {
                    "emissions differ between runs".into()
                },
            )
        }
        (a, b) => result(
            "end-to-end report determinism (two runs, identical bytes)",
            false,
            format!("run errors: {:?} / {:?}", a.err(), b.err()),
        ),
    }
}

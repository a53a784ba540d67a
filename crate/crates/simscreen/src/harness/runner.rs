//! Grid execution: explanation settings x sweep values x seeds, with
//! cached generation and deterministic aggregation.
//!
//! Generation is the expensive step, so each (setting, seed) pair builds
//! one master dataset at the largest swept size; smaller train-set or
//! set-size cells are prefix slices, which equal regeneration because
//! generators key per-example randomness by example index. Bug-strength
//! sweeps change the generated data itself and get one master per value.

use rayon::prelude::*;
use serde::Serialize;

use crate::agent::network::Pooling;
use crate::agent::{eval_agent, eval_boosted_agent, init_deepset, train_agent, train_boosted_agent, TrainConfig};
use crate::data::adult::{load_adult_csv, parse_adult};
use crate::data::schema::TabularDataset;
use crate::data::synthetic::synthetic_adult_csv;
use crate::error::Result;
use crate::explain::anchors::AnchorConfig;
use crate::explain::lime::LimeConfig;
use crate::models::gam::GamParams;
use crate::models::gbm::{GbmLoss, GbmParams};
use crate::rng::RngStream;
use crate::usecase::bugs::{gen_data_bugs, DataBugsConfig};
use crate::usecase::counterfactual::{gen_counterfactual, CounterfactualConfig};
use crate::usecase::forward_sim::{gen_forward_sim, ForwardSimConfig};
use crate::usecase::types::{AgentDataset, ExplanationSetting};

use super::cache::{digest_value, Cache};
use super::config::{AgentKind, ExperimentConfig, PoolingConfig, SweepAxis, UseCaseConfig};
use super::report::{CellError, Report, ResultRow};

/// Stream ids reserved per seed: generation, agent init, agent batches.
const STREAM_GENERATION: u64 = 0;
const STREAM_AGENT_INIT: u64 = 101;
const STREAM_AGENT_TRAIN: u64 = 102;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let started = std::time::Instant::now();
    cfg.validate()?;
    let fingerprint = cfg.fingerprint();

    let base = load_base_data(cfg)?;
    let data_digest = base_data_digest(cfg);
    let cache = match &cfg.cache_dir {
        Some(dir) => Some(Cache::new(dir)?),
        None => None,
    };

    let units = plan_units(cfg);
    let outcomes: Vec<UnitOutcome> = units
        .par_iter()
        .map(|unit| execute_unit(cfg, unit, base.as_ref(), &data_digest, cache.as_ref()))
        .collect();

    let mut cells: Vec<(String, f64, u64, f64)> = Vec::new();
    let mut errors: Vec<CellError> = Vec::new();
    let mut notes: Vec<String> = Vec::new();
    for (unit, outcome) in units.iter().zip(outcomes) {
        match outcome {
            UnitOutcome::Done { accuracies, note } => {
                if let Some(n) = note {
                    notes.push(n);
                }
                for (value, acc) in unit.values.iter().zip(accuracies) {
                    cells.push((unit.setting.name().to_string(), *value, unit.seed, acc));
                }
            }
            UnitOutcome::Failed(message) => {
                for value in &unit.values {
                    errors.push(CellError {
                        cell: format!(
                            "setting={} sweep={} seed={}",
                            unit.setting.name(),
                            value,
                            unit.seed
                        ),
                        message: message.clone(),
                    });
                }
            }
        }
    }

    // Aggregate by (setting, sweep value), seeds in config order.
    let mut rows: Vec<ResultRow> = Vec::new();
    for setting in &cfg.explanation_settings {
        for value in &cfg.sweep.values {
            let accs: Vec<f64> = cfg
                .seeds
                .iter()
                .filter_map(|&seed| {
                    cells
                        .iter()
                        .find(|(s, v, sd, _)| {
                            s == setting.name() && v == value && *sd == seed
                        })
                        .map(|(_, _, _, a)| *a)
                })
                .collect();
            if !accs.is_empty() {
                rows.push(ResultRow::from_accuracies(setting.name(), *value, accs));
            }
        }
    }
    rows.sort_by(|a, b| {
        a.setting
            .cmp(&b.setting)
            .then(a.sweep_value.partial_cmp(&b.sweep_value).unwrap())
    });
    errors.sort_by(|a, b| a.cell.cmp(&b.cell));
    notes.sort();

    Ok(Report {
        format_version: 1,
        fingerprint,
        use_case: cfg.use_case.name().to_string(),
        sweep_axis: cfg.sweep.axis.name().to_string(),
        rows,
        errors,
        notes,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    })
}

/// One generation unit: a master dataset serving one or more sweep cells.
#[derive(Debug, Clone)]
pub struct GenUnit {
    pub setting: ExplanationSetting,
    pub seed: u64,
    pub strength: Option<f64>,
    /// Sweep values served by this master, ascending.
    pub values: Vec<f64>,
}

enum UnitOutcome {
    Done {
        accuracies: Vec<f64>,
        note: Option<String>,
    },
    Failed(String),
}

pub fn plan_units(cfg: &ExperimentConfig) -> Vec<GenUnit> {
    let mut values = cfg.sweep.values.clone();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    let mut units = Vec::new();
    for &setting in &cfg.explanation_settings {
        for &seed in &cfg.seeds {
            match cfg.sweep.axis {
                SweepAxis::TrainSize | SweepAxis::SetSize => units.push(GenUnit {
                    setting,
                    seed,
                    strength: None,
                    values: values.clone(),
                }),
                SweepAxis::BugStrength => {
                    for &v in &values {
                        units.push(GenUnit {
                            setting,
                            seed,
                            strength: Some(v),
                            values: vec![v],
                        });
                    }
                }
            }
        }
    }
    units
}

pub fn load_base_data(cfg: &ExperimentConfig) -> Result<Option<TabularDataset>> {
    match cfg.use_case {
        UseCaseConfig::Counterfactual => Ok(None),
        _ => {
            let ds = match &cfg.data.adult_csv {
                Some(path) => load_adult_csv(path)?,
                None => parse_adult(&synthetic_adult_csv(
                    cfg.data.synthetic_rows,
                    RngStream::new(cfg.data.synthetic_seed, 0),
                ))?,
            };
            Ok(Some(ds))
        }
    }
}

pub fn base_data_digest(cfg: &ExperimentConfig) -> String {
    match &cfg.data.adult_csv {
        Some(path) => match std::fs::read(path) {
            Ok(bytes) => {
                use sha2::{Digest, Sha256};
                let mut h = Sha256::new();
                h.update(&bytes);
                hex::encode(h.finalize())
            }
            Err(_) => format!("missing:{}", path.display()),
        },
        None => format!(
            "synthetic:{}:{}",
            cfg.data.synthetic_rows, cfg.data.synthetic_seed
        ),
    }
}

/// Everything that determines the bytes of a generated master dataset.
#[derive(Serialize)]
struct CellKey<'a> {
    format: u32,
    use_case: &'a str,
    bug: Option<&'a crate::usecase::bugs::BugKind>,
    strength: Option<f64>,
    setting: &'a str,
    seed: u64,
    n_train: usize,
    n_test: usize,
    set_size: usize,
    generator: &'a super::config::GeneratorConfig,
    base_model: &'a super::config::BaseModelConfig,
    explainer: &'a super::config::ExplainerConfig,
    data: &'a str,
}

fn execute_unit(
    cfg: &ExperimentConfig,
    unit: &GenUnit,
    base: Option<&TabularDataset>,
    data_digest: &str,
    cache: Option<&Cache>,
) -> UnitOutcome {
    match materialize_unit(cfg, unit, base, data_digest, cache) {
        Err(e) => UnitOutcome::Failed(e.to_string()),
        Ok((master, note)) => {
            let mut accuracies = Vec::with_capacity(unit.values.len());
            for &value in &unit.values {
                let sliced = match cfg.sweep.axis {
                    SweepAxis::TrainSize => master.slice_train(value as usize),
                    SweepAxis::SetSize => master.slice_set_size(value as usize),
                    SweepAxis::BugStrength => master.clone(),
                };
                match train_and_eval(cfg, unit.seed, &sliced, value, cache) {
                    Ok(acc) => accuracies.push(acc),
                    Err(e) => return UnitOutcome::Failed(e.to_string()),
                }
            }
            UnitOutcome::Done {
                accuracies,
                note,
            }
        }
    }
}

/// Produce (from cache or by generation) the unit's master dataset.
pub fn materialize_unit(
    cfg: &ExperimentConfig,
    unit: &GenUnit,
    base: Option<&TabularDataset>,
    data_digest: &str,
    cache: Option<&Cache>,
) -> Result<(AgentDataset, Option<String>)> {
    let master_n_train = match cfg.sweep.axis {
        SweepAxis::TrainSize => unit.values.last().copied().unwrap_or(1.0) as usize,
        _ => cfg.resolved_n_train(),
    };
    let master_set_size = match cfg.sweep.axis {
        SweepAxis::SetSize => unit.values.last().copied().unwrap_or(1.0) as usize,
        _ => cfg.generator.set_size,
    };
    let bug = match &cfg.use_case {
        UseCaseConfig::DataBugs { bug } => Some(bug),
        _ => None,
    };
    let key = CellKey {
        format: super::cache::CACHE_FORMAT_VERSION,
        use_case: cfg.use_case.name(),
        bug,
        strength: unit.strength,
        setting: unit.setting.name(),
        seed: unit.seed,
        n_train: master_n_train,
        n_test: cfg.resolved_n_test(),
        set_size: master_set_size,
        generator: &cfg.generator,
        base_model: &cfg.base_model,
        explainer: &cfg.explainer,
        data: data_digest,
    };
    let fingerprint = digest_value(&key);

    if let Some(cache) = cache {
        if let Some(ds) = cache.load_dataset(&fingerprint)? {
            return Ok((ds, None));
        }
    }

    let gen_rng = RngStream::new(unit.seed, STREAM_GENERATION);
    let (mut ds, note) = match &cfg.use_case {
        UseCaseConfig::Counterfactual => {
            let gen_cfg = CounterfactualConfig {
                n_train: master_n_train,
                n_test: cfg.resolved_n_test(),
                base_train_size: cfg.generator.base_train_size,
                gbm: gbm_params(cfg, GbmLoss::SquaredError),
                gam: gam_params(cfg),
                lime: lime_config(cfg),
                shap_background: cfg.explainer.shap_background,
                ..CounterfactualConfig::default()
            };
            let (ds, diag) = gen_counterfactual(&gen_cfg, unit.setting, gen_rng)?;
            let note = format!(
                "counterfactual setting={} seed={}: mean base-model fidelity {:.4}, {} of {} under the {:.2} gate",
                unit.setting.name(),
                unit.seed,
                diag.mean_fidelity,
                diag.below_gate.len(),
                ds.train.len() + ds.test.len(),
                diag.gate,
            );
            (ds, Some(note))
        }
        UseCaseConfig::ForwardSim => {
            let gen_cfg = ForwardSimConfig {
                n_train: master_n_train,
                n_test: cfg.resolved_n_test(),
                split_fractions: cfg.generator.split_fractions,
                gbm: gbm_params(cfg, GbmLoss::Logistic),
                gam: gam_params(cfg),
                lime: lime_config(cfg),
                anchors: AnchorConfig {
                    precision_threshold: cfg.explainer.anchors_precision,
                    beam_width: cfg.explainer.anchors_beam,
                    n_eval_samples: cfg.explainer.anchors_samples,
                    bins: cfg.explainer.anchors_bins,
                },
                shap_background: cfg.explainer.shap_background,
                shap_perms: cfg.explainer.shap_perms,
            };
            let ds = gen_forward_sim(
                base.expect("forward simulation has base data"),
                &gen_cfg,
                unit.setting,
                gen_rng,
            )?;
            (ds, None)
        }
        UseCaseConfig::DataBugs { bug } => {
            let bug = match unit.strength {
                Some(s) => bug.with_strength(s),
                None => bug.clone(),
            };
            let gen_cfg = DataBugsConfig {
                n_train: master_n_train,
                n_test: cfg.resolved_n_test(),
                set_size: master_set_size,
                subsample_size: cfg.generator.subsample_size,
                bug,
                gbm: gbm_params(cfg, GbmLoss::Logistic),
                gam: gam_params(cfg),
                lime: lime_config(cfg),
                shap_background: cfg.explainer.shap_background,
                shap_perms: cfg.explainer.shap_perms,
            };
            let ds = gen_data_bugs(
                base.expect("data bugs has base data"),
                &gen_cfg,
                unit.setting,
                gen_rng,
            )?;
            (ds, None)
        }
    };
    ds.provenance.generator_digest = fingerprint.clone();

    if let Some(cache) = cache {
        cache.store_dataset(&fingerprint, &ds)?;
    }
    Ok((ds, note))
}

/// Identity of a trained agent: the sliced dataset plus every training
/// knob. Lets reruns skip straight to evaluation.
#[derive(Serialize)]
struct AgentKey<'a> {
    dataset: &'a str,
    sweep_axis: &'a str,
    sweep_value: f64,
    agent: &'a super::config::AgentConfig,
    epochs: usize,
    weight_decay: f64,
    seed: u64,
}

fn train_and_eval(
    cfg: &ExperimentConfig,
    seed: u64,
    data: &AgentDataset,
    sweep_value: f64,
    cache: Option<&Cache>,
) -> Result<f64> {
    let agent_fp = digest_value(&AgentKey {
        dataset: &data.provenance.generator_digest,
        sweep_axis: cfg.sweep.axis.name(),
        sweep_value,
        agent: &cfg.agent,
        epochs: cfg.resolved_epochs(),
        weight_decay: cfg.resolved_weight_decay(),
        seed,
    });
    match cfg.agent.kind {
        AgentKind::Deepset => {
            if let Some(cache) = cache {
                if let Some(trained) =
                    cache.load_model::<crate::agent::DeepSetParams>(&agent_fp, "deepset")?
                {
                    return eval_agent(&trained, data);
                }
            }
            let pooling = match cfg.agent.pooling {
                PoolingConfig::Sum => Pooling::Sum,
                PoolingConfig::Concat => Pooling::Concat {
                    set_size: data.set_size(),
                },
            };
            let params = init_deepset(
                data.observation_width(),
                pooling,
                RngStream::new(seed, STREAM_AGENT_INIT),
            );
            let train_cfg = TrainConfig {
                learning_rate: cfg.agent.learning_rate,
                weight_decay: cfg.resolved_weight_decay(),
                batch_size: cfg.agent.batch_size,
                epochs: cfg.resolved_epochs(),
                rng: RngStream::new(seed, STREAM_AGENT_TRAIN),
            };
            let (trained, _history) = train_agent(&params, data, &train_cfg)?;
            if let Some(cache) = cache {
                cache.store_model(&agent_fp, "deepset", &trained)?;
            }
            eval_agent(&trained, data)
        }
        AgentKind::Boosted => {
            if let Some(cache) = cache {
                if let Some(model) =
                    cache.load_model::<crate::models::gbm::GbmModel>(&agent_fp, "gbm")?
                {
                    return eval_boosted_agent(&model, data);
                }
            }
            let params = GbmParams {
                n_trees: cfg.base_model.gbm_trees,
                max_depth: cfg.resolved_gbm_depth(),
                learning_rate: cfg.base_model.gbm_learning_rate,
                min_samples_leaf: cfg.base_model.gbm_min_leaf,
                loss: GbmLoss::Logistic,
            };
            let model = train_boosted_agent(data, &params, RngStream::new(seed, STREAM_AGENT_INIT))?;
            if let Some(cache) = cache {
                cache.store_model(&agent_fp, "gbm", &model)?;
            }
            eval_boosted_agent(&model, data)
        }
    }
}

fn gbm_params(cfg: &ExperimentConfig, loss: GbmLoss) -> GbmParams {
    GbmParams {
        n_trees: cfg.base_model.gbm_trees,
        max_depth: cfg.resolved_gbm_depth(),
        learning_rate: cfg.base_model.gbm_learning_rate,
        min_samples_leaf: cfg.base_model.gbm_min_leaf,
        loss,
    }
}

fn gam_params(cfg: &ExperimentConfig) -> GamParams {
    GamParams {
        max_bins: cfg.resolved_gam_bins(),
        rounds: cfg.base_model.gam_rounds,
        learning_rate: cfg.base_model.gam_learning_rate,
    }
}

fn lime_config(cfg: &ExperimentConfig) -> LimeConfig {
    LimeConfig {
        n_samples: cfg.explainer.lime_samples,
        kernel_width: cfg.explainer.lime_kernel_width,
        ridge_strength: cfg.explainer.lime_ridge,
    }
}

//! Experiment configuration: a single JSON document, canonicalized for
//! fingerprinting, with per-use-case defaults resolved at run time.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::usecase::bugs::BugKind;
use crate::usecase::types::ExplanationSetting;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UseCaseConfig {
    ForwardSim,
    Counterfactual,
    DataBugs { bug: BugKind },
}

impl UseCaseConfig {
    pub fn name(&self) -> &'static str {
        match self {
            UseCaseConfig::ForwardSim => "forward_sim",
            UseCaseConfig::Counterfactual => "counterfactual",
            UseCaseConfig::DataBugs { .. } => "data_bugs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    TrainSize,
    SetSize,
    BugStrength,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::TrainSize => "train_size",
            SweepAxis::SetSize => "set_size",
            SweepAxis::BugStrength => "bug_strength",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    /// Path to an Adult-layout CSV. When absent, a synthetic corpus in
    /// the same layout is generated.
    pub adult_csv: Option<PathBuf>,
    pub synthetic_rows: usize,
    pub synthetic_seed: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            adult_csv: None,
            synthetic_rows: 16_000,
            synthetic_seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub set_size: usize,
    pub subsample_size: usize,
    pub base_train_size: usize,
    pub split_fractions: (f64, f64, f64),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_train: None,
            n_test: None,
            set_size: 1,
            subsample_size: 4000,
            base_train_size: 5000,
            split_fractions: (0.7, 0.15, 0.15),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaseModelConfig {
    pub gbm_trees: usize,
    /// Defaults per use case: 5 for the counterfactual saddle models
    /// (the fidelity gate needs fine leaves), 3 elsewhere.
    pub gbm_depth: Option<usize>,
    pub gbm_learning_rate: f64,
    pub gbm_min_leaf: usize,
    /// Defaults per use case: 64 for counterfactual, 32 elsewhere.
    pub gam_bins: Option<usize>,
    pub gam_rounds: usize,
    pub gam_learning_rate: f64,
}

impl Default for BaseModelConfig {
    fn default() -> Self {
        BaseModelConfig {
            gbm_trees: 100,
            gbm_depth: None,
            gbm_learning_rate: 0.1,
            gbm_min_leaf: 5,
            gam_bins: None,
            gam_rounds: 200,
            gam_learning_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainerConfig {
    pub lime_samples: usize,
    pub lime_kernel_width: Option<f64>,
    pub lime_ridge: f64,
    pub shap_background: usize,
    pub shap_perms: usize,
    pub anchors_precision: f64,
    pub anchors_beam: usize,
    pub anchors_samples: usize,
    pub anchors_bins: usize,
}

impl Default for ExplainerConfig {
    fn default() -> Self {
        ExplainerConfig {
            lime_samples: 1000,
            lime_kernel_width: None,
            lime_ridge: 1e-3,
            shap_background: 20,
            shap_perms: 128,
            anchors_precision: 0.95,
            anchors_beam: 2,
            anchors_samples: 500,
            anchors_bins: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Deepset,
    Boosted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolingConfig {
    Sum,
    Concat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub kind: AgentKind,
    pub pooling: PoolingConfig,
    pub learning_rate: f64,
    /// Defaults per use case: 1e-4 for counterfactual reasoning, 0
    /// elsewhere.
    pub weight_decay: Option<f64>,
    pub batch_size: usize,
    /// Defaults per use case: 350 for forward simulation and data bugs,
    /// 1000 for counterfactual reasoning.
    pub epochs: Option<usize>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            kind: AgentKind::Deepset,
            pooling: PoolingConfig::Sum,
            learning_rate: 1e-4,
            weight_decay: None,
            batch_size: 16,
            epochs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub use_case: UseCaseConfig,
    pub explanation_settings: Vec<ExplanationSetting>,
    pub sweep: Sweep,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub base_model: BaseModelConfig,
    #[serde(default)]
    pub explainer: ExplainerConfig,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::ConfigInvalid {
                path: "<document>".into(),
                message: e.to_string(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: String| -> Result<()> {
            Err(Error::ConfigInvalid {
                path: path.into(),
                message,
            })
        };
        if self.explanation_settings.is_empty() {
            return bad("explanation_settings", "at least one setting".into());
        }
        if self.sweep.values.is_empty() {
            return bad("sweep.values", "at least one sweep value".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds", "at least one seed".into());
        }
        for setting in &self.explanation_settings {
            let ok = match self.use_case {
                UseCaseConfig::ForwardSim => true,
                // anchors explains a class; the counterfactual base models
                // are regressors, and the data-bugs study pairs only
                // attribution settings with the prediction baseline
                UseCaseConfig::Counterfactual | UseCaseConfig::DataBugs { .. } => {
                    *setting != ExplanationSetting::Anchors
                }
            };
            if !ok {
                return bad(
                    "explanation_settings",
                    format!(
                        "setting '{}' is not valid for use case '{}'",
                        setting.name(),
                        self.use_case.name()
                    ),
                );
            }
        }
        match self.sweep.axis {
            SweepAxis::TrainSize => {
                if self
                    .sweep
                    .values
                    .iter()
                    .any(|&v| v < 1.0 || v.fract() != 0.0)
                {
                    return bad("sweep.values", "train sizes must be positive integers".into());
                }
            }
            SweepAxis::SetSize => {
                if !matches!(self.use_case, UseCaseConfig::DataBugs { .. }) {
                    return bad(
                        "sweep.axis",
                        "set-size sweeps apply only to the data-bugs use case".into(),
                    );
                }
                if self
                    .sweep
                    .values
                    .iter()
                    .any(|&v| v < 1.0 || v.fract() != 0.0)
                {
                    return bad("sweep.values", "set sizes must be positive integers".into());
                }
            }
            SweepAxis::BugStrength => {
                if !matches!(self.use_case, UseCaseConfig::DataBugs { .. }) {
                    return bad(
                        "sweep.axis",
                        "bug-strength sweeps apply only to the data-bugs use case".into(),
                    );
                }
                if self.sweep.values.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                    return bad("sweep.values", "bug strengths must lie in [0, 1]".into());
                }
            }
        }
        if let UseCaseConfig::DataBugs { bug } = &self.use_case {
            if !(0.0..=1.0).contains(&bug.strength()) {
                return bad("use_case.bug.strength", "strength must lie in [0, 1]".into());
            }
        }
        if self.agent.learning_rate <= 0.0 {
            return bad("agent.learning_rate", "must be positive".into());
        }
        if self.agent.batch_size < 1 {
            return bad("agent.batch_size", "must be at least 1".into());
        }
        let (a, b, c) = self.generator.split_fractions;
        if a <= 0.0 || b <= 0.0 || c <= 0.0 || (a + b + c - 1.0).abs() > 1e-9 {
            return bad(
                "generator.split_fractions",
                "fractions must be positive and sum to 1".into(),
            );
        }
        if self.agent.kind == AgentKind::Boosted && self.agent.pooling == PoolingConfig::Concat {
            return bad("agent.pooling", "pooling applies only to the deepset agent".into());
        }
        Ok(())
    }

    /// Scale the experiment down to a smoke-test profile.
    pub fn apply_fast_profile(&mut self) {
        self.data.synthetic_rows = self.data.synthetic_rows.min(4000);
        self.generator.base_train_size = self.generator.base_train_size.min(2000);
        self.generator.subsample_size = self.generator.subsample_size.min(1200);
        self.generator.n_train = Some(self.generator.n_train.unwrap_or(64).min(64));
        self.generator.n_test = Some(self.generator.n_test.unwrap_or(64).min(64));
        self.explainer.lime_samples = self.explainer.lime_samples.min(200);
        self.explainer.shap_perms = self.explainer.shap_perms.min(16);
        self.explainer.anchors_samples = self.explainer.anchors_samples.min(150);
        self.agent.epochs = Some(self.agent.epochs.unwrap_or(40).min(40));
        self.sweep.values = self
            .sweep
            .values
            .iter()
            .map(|&v| match self.sweep.axis {
                SweepAxis::TrainSize => v.min(64.0),
                SweepAxis::SetSize => v.min(10.0),
                SweepAxis::BugStrength => v,
            })
            .collect();
        self.sweep.values.dedup();
    }

    /// Hash of the canonicalized (key-sorted, compact) JSON form.
    pub fn fingerprint(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = canonical_json(&value);
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex::encode(hasher.finalize())
    }

    pub fn resolved_n_train(&self) -> usize {
        self.generator.n_train.unwrap_or(match self.use_case {
            UseCaseConfig::DataBugs { .. } => 300,
            _ => 1000,
        })
    }

    pub fn resolved_n_test(&self) -> usize {
        self.generator.n_test.unwrap_or(match self.use_case {
            UseCaseConfig::DataBugs { .. } => 100,
            _ => 250,
        })
    }

    pub fn resolved_epochs(&self) -> usize {
        self.agent.epochs.unwrap_or(match self.use_case {
            UseCaseConfig::Counterfactual => 1000,
            _ => 350,
        })
    }

    pub fn resolved_weight_decay(&self) -> f64 {
        self.agent.weight_decay.unwrap_or(match self.use_case {
            UseCaseConfig::Counterfactual => 1e-4,
            _ => 0.0,
        })
    }

    pub fn resolved_gbm_depth(&self) -> usize {
        self.base_model.gbm_depth.unwrap_or(match self.use_case {
            UseCaseConfig::Counterfactual => 5,
            _ => 3,
        })
    }

    pub fn resolved_gam_bins(&self) -> usize {
        self.base_model.gam_bins.unwrap_or(match self.use_case {
            UseCaseConfig::Counterfactual => 64,
            _ => 32,
        })
    }
}

/// Serialize with object keys sorted recursively, so a fingerprint does
/// not depend on key order in the source document.
pub fn canonical_json(value: &Value) -> String {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let fields: Vec<String> = keys
                .into_iter()
                .map(|k| {
                    format!(
                        "{}:{}",
                        serde_json::to_string(k).unwrap(),
                        canonical_json(&map[k])
                    )
                })
                .collect();
            format!("{{{}}}", fields.join(","))
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(canonical_json).collect();
            format!("[{}]", parts.join(","))
        }
        other => serde_json::to_string(other).unwrap(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ExperimentConfig {
        ExperimentConfig {
            use_case: UseCaseConfig::Counterfactual,
            explanation_settings: vec![ExplanationSetting::Surrogate],
            sweep: Sweep {
                axis: SweepAxis::TrainSize,
                values: vec![16.0],
            },
            seeds: vec![1, 2, 3],
            data: DataConfig::default(),
            generator: GeneratorConfig::default(),
            base_model: BaseModelConfig::default(),
            explainer: ExplainerConfig::default(),
            agent: AgentConfig::default(),
            cache_dir: None,
            output_dir: None,
        }
    }

    #[test]
    fn fingerprint_ignores_key_order() {
        let cfg = minimal();
        let text = serde_json::to_string(&cfg).unwrap();
        let value: Value = serde_json::from_str(&text).unwrap();
        // rebuild a json document with reversed key order
        let reordered = match value {
            Value::Object(map) => {
                let mut pairs: Vec<(String, Value)> = map.into_iter().collect();
                pairs.reverse();
                let mut out = String::from("{");
                for (i, (k, v)) in pairs.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&format!(
                        "{}:{}",
                        serde_json::to_string(k).unwrap(),
                        serde_json::to_string(v).unwrap()
                    ));
                }
                out.push('}');
                out
            }
            _ => unreachable!(),
        };
        let back = ExperimentConfig::from_json(&reordered).unwrap();
        assert_eq!(cfg.fingerprint(), back.fingerprint());
    }

    #[test]
    fn anchors_with_counterfactual_is_invalid() {
        let mut cfg = minimal();
        cfg.explanation_settings = vec![ExplanationSetting::Anchors];
        let err = cfg.validate().unwrap_err();
        match err {
            Error::ConfigInvalid { path, message } => {
                assert_eq!(path, "explanation_settings");
                assert!(message.contains("anchors"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn strength_sweep_needs_data_bugs() {
        let mut cfg = minimal();
        cfg.sweep.axis = SweepAxis::BugStrength;
        cfg.sweep.values = vec![0.1];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn per_use_case_defaults() {
        let cf = minimal();
        assert_eq!(cf.resolved_epochs(), 1000);
        assert_eq!(cf.resolved_weight_decay(), 1e-4);
        let mut bugs = minimal();
        bugs.use_case = UseCaseConfig::DataBugs {
            bug: BugKind::MissingValues { strength: 0.3 },
        };
        assert_eq!(bugs.resolved_epochs(), 350);
        assert_eq!(bugs.resolved_n_train(), 300);
        assert_eq!(bugs.resolved_weight_decay(), 0.0);
    }
}

//! Agent-facing dataset types shared by all three use cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::encode::{EncodedObservation, ObservationLayout};

/// Which information-content bundle accompanies each data-point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationSetting {
    Surrogate,
    Shapley,
    Gam,
    Anchors,
    /// No explanation span: the data-point, plus the base-model
    /// prediction where the use case carries one.
    Baseline,
}

impl ExplanationSetting {
    pub fn name(&self) -> &'static str {
        match self {
            ExplanationSetting::Surrogate => "surrogate",
            ExplanationSetting::Shapley => "shapley",
            ExplanationSetting::Gam => "gam",
            ExplanationSetting::Anchors => "anchors",
            ExplanationSetting::Baseline => "baseline",
        }
    }
}

/// One question for the agent: an ordered set of observations and the
/// ground-truth use-case answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentExample {
    pub observations: Vec<EncodedObservation>,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub use_case: String,
    pub setting: String,
    pub generator_digest: String,
    pub seed: u64,
}

/// Train/test partitions of agent examples sharing a single layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentDataset {
    pub train: Vec<AgentExample>,
    pub test: Vec<AgentExample>,
    pub layout: ObservationLayout,
    pub provenance: Provenance,
}

impl AgentDataset {
    /// Validates the single-layout and non-empty-set invariants.
    pub fn assemble(
        train: Vec<AgentExample>,
        test: Vec<AgentExample>,
        provenance: Provenance,
    ) -> Result<Self> {
        let first = train
            .first()
            .or_else(|| test.first())
            .ok_or(Error::EmptyData { min: 1 })?;
        let layout = first.observations[0].layout.clone();
        for example in train.iter().chain(test.iter()) {
            if example.observations.is_empty() {
                return Err(Error::LayoutMismatch("example with empty observation set".into()));
            }
            if example.label > 1 {
                return Err(Error::LayoutMismatch("labels must be 0 or 1".into()));
            }
            for obs in &example.observations {
                if obs.layout != layout {
                    return Err(Error::LayoutMismatch(format!(
                        "observation layout {:?} differs from dataset layout {:?}",
                        obs.layout, layout
                    )));
                }
            }
        }
        Ok(AgentDataset {
            train,
            test,
            layout,
            provenance,
        })
    }

    pub fn observation_width(&self) -> usize {
        self.layout.total()
    }

    pub fn set_size(&self) -> usize {
        self.train
            .first()
            .or_else(|| self.test.first())
            .map_or(0, |e| e.observations.len())
    }

    /// Keep only the first `n` training examples. Generators key their
    /// per-example randomness by index, so this equals regenerating with
    /// the smaller size.
    pub fn slice_train(&self, n: usize) -> AgentDataset {
        let mut out = self.clone();
        out.train.truncate(n);
        out
    }

    /// Keep only the first `s` observations of every example set.
    pub fn slice_set_size(&self, s: usize) -> AgentDataset {
        let mut out = self.clone();
        for example in out.train.iter_mut().chain(out.test.iter_mut()) {
            example.observations.truncate(s);
        }
        out
    }
}

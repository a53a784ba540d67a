//! Step 1 of the framework: generating (observation set, use-case label)
//! datasets for the three use cases.

pub mod bugs;
pub mod counterfactual;
pub mod forward_sim;
pub mod saddle;
pub mod types;

pub use bugs::{apply_bug, gen_data_bugs, BugKind, DataBugsConfig, IMPUTED_AGE};
pub use counterfactual::{gen_counterfactual, CounterfactualConfig, CounterfactualDiagnostics};
pub use forward_sim::{gen_forward_sim, ForwardSimConfig};
pub use saddle::{
    sample_saddle_spec, saddle_label, saddle_sample, saddle_schema, verify_saddle_fidelity,
    SaddleSpec,
};
pub use types::{AgentDataset, AgentExample, ExplanationSetting, Provenance};

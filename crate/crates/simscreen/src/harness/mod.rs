//! Experiment orchestration: configs, cached generation, grid execution,
//! aggregation and report emission.

pub mod cache;
pub mod config;
pub mod report;
pub mod runner;
pub mod verify;

pub use cache::Cache;
pub use config::{
    AgentConfig, AgentKind, BaseModelConfig, DataConfig, ExperimentConfig, ExplainerConfig,
    GeneratorConfig, PoolingConfig, Sweep, SweepAxis, UseCaseConfig,
};
pub use report::{emit_report_files, CellError, Report, ResultRow};
pub use runner::{materialize_unit, plan_units, run_experiment};
pub use verify::{property_suite, PropertyResult};

//! Simulated screening of explanation methods.
//!
//! Trains algorithmic agents on exactly the information content a study
//! participant would see (data-points, base-model predictions, model
//! explanations) and reports per-setting agent test accuracy as a
//! screening measure of how predictive that information is for a
//! downstream use case. Three use cases are built in: forward simulation
//! of a model's prediction, counterfactual reasoning about a feature
//! increase, and detecting training-data bugs.

pub mod agent;
pub mod data;
pub mod error;
pub mod explain;
pub mod harness;
pub mod models;
pub mod rng;
pub mod usecase;

pub use error::{Error, Result};
pub use rng::RngStream;

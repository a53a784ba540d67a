//! Explanation methods and observation encoding.

pub mod anchors;
pub mod encode;
pub mod gam_local;
pub mod lime;
pub mod shap;

pub use anchors::{anchors_explain, AnchorConfig, AnchorRule};
pub use encode::{encode_observation, EncodedObservation, Explanation, ObservationLayout, UseCaseKind};
pub use gam_local::{gam_local, GamExplanation};
pub use lime::{lime_explain, LimeConfig, SurrogateExplanation};
pub use shap::{shap_exact, shap_sampled, ShapleyExplanation, EXACT_GROUP_BOUND};

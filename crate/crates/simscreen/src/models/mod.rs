//! Base prediction models that explanations describe.

pub mod gam;
pub mod gbm;
pub mod serialize;

pub use gam::{fit_gam, gam_predict, GamLink, GamModel, GamParams, ShapeFn};
pub use gbm::{
    fit_gbm, fit_gbm_grouped, gbm_predict, gbm_predict_view, GbmLoss, GbmModel, GbmParams,
};
pub use serialize::{from_model_doc, to_model_doc, MODEL_FORMAT_VERSION};

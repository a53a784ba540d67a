//! Dataset representation, ingestion, preprocessing and splitting.

pub mod adult;
pub mod encode;
pub mod schema;
pub mod split;
pub mod synthetic;

pub use adult::{load_adult_csv, parse_adult};
pub use encode::{
    apply_pipeline, apply_pipeline_row, fit_pipeline, minmax_scale, one_hot_decode,
    one_hot_encode, one_hot_encode_row, EncodingMaps,
};
pub use schema::{FeatureKind, FeatureSchema, TabularDataset, TargetKind};
pub use split::{split, subsample};
pub use synthetic::synthetic_adult_csv;

//! Versioned JSON document wrapper for fitted models, shared by the
//! harness cache for base models and agent parameters.

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDoc {
    pub format_version: u32,
    pub kind: String,
    pub payload: serde_json::Value,
}

pub fn to_model_doc<T: Serialize>(kind: &str, model: &T) -> Result<String> {
    let doc = ModelDoc {
        format_version: MODEL_FORMAT_VERSION,
        kind: kind.to_string(),
        payload: serde_json::to_value(model)?,
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn from_model_doc<T: DeserializeOwned>(text: &str, kind: &str) -> Result<T> {
    let doc: ModelDoc = serde_json::from_str(text)?;
    if doc.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            expected: MODEL_FORMAT_VERSION,
            found: doc.format_version,
        });
    }
    if doc.kind != kind {
        return Err(Error::CorruptEntry(format!(
            "model kind '{}' where '{kind}' was expected",
            doc.kind
        )));
    }
    Ok(serde_json::from_value(doc.payload)?)
}

//! On-disk cache of generated agent datasets, fitted models and reports.
//!
//! Agent datasets are line-delimited JSON: a header line carrying the
//! format version, the cell fingerprint, the shared observation layout
//! and a checksum of the body, then one example per line. Models reuse
//! the versioned model document; reports are plain JSON with the same
//! header fields.

use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::explain::encode::{EncodedObservation, ObservationLayout};
use crate::usecase::types::{AgentDataset, AgentExample, Provenance};

pub const CACHE_FORMAT_VERSION: u32 = 1;

/// Hash of a canonicalized JSON value, used both for cache keys and for
/// integrity fields.
pub fn digest_value<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    let canonical = super::config::canonical_json(&v);
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hex::encode(hasher.finalize())
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetHeader {
    format_version: u32,
    fingerprint: String,
    layouts: Vec<ObservationLayout>,
    provenance: Provenance,
    n_train: usize,
    n_test: usize,
    checksum: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExampleLine {
    layout: usize,
    label: u8,
    obs: Vec<Vec<f64>>,
}

pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl AsRef<Path>) -> Result<Cache> {
        let root = root.as_ref().to_path_buf();
        std::fs::create_dir_all(root.join("datasets"))?;
        std::fs::create_dir_all(root.join("models"))?;
        std::fs::create_dir_all(root.join("reports"))?;
        Ok(Cache { root })
    }

    pub fn dataset_path(&self, fingerprint: &str) -> PathBuf {
        self.root.join("datasets").join(format!("{fingerprint}.jsonl"))
    }

    pub fn store_dataset(&self, fingerprint: &str, ds: &AgentDataset) -> Result<PathBuf> {
        let mut body = String::new();
        for example in ds.train.iter().chain(ds.test.iter()) {
            let line = ExampleLine {
                layout: 0,
                label: example.label,
                obs: example
                    .observations
                    .iter()
                    .map(|o| o.vector.clone())
                    .collect(),
            };
            body.push_str(&serde_json::to_string(&line)?);
            body.push('\n');
        }
        let header = DatasetHeader {
            format_version: CACHE_FORMAT_VERSION,
            fingerprint: fingerprint.to_string(),
            layouts: vec![ds.layout.clone()],
            provenance: ds.provenance.clone(),
            n_train: ds.train.len(),
            n_test: ds.test.len(),
            checksum: sha256_hex(body.as_bytes()),
        };
        let path = self.dataset_path(fingerprint);
        let tmp = path.with_extension("jsonl.tmp");
        std::fs::write(&tmp, format!("{}\n{body}", serde_json::to_string(&header)?))?;
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }

    pub fn load_dataset(&self, fingerprint: &str) -> Result<Option<AgentDataset>> {
        let path = self.dataset_path(fingerprint);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let (header_line, body) = text
            .split_once('\n')
            .ok_or_else(|| Error::CorruptEntry(format!("{}: missing header", path.display())))?;
        let header: DatasetHeader = serde_json::from_str(header_line)
            .map_err(|e| Error::CorruptEntry(format!("{}: {e}", path.display())))?;
        if header.format_version != CACHE_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: CACHE_FORMAT_VERSION,
                found: header.format_version,
            });
        }
        if header.fingerprint != fingerprint {
            return Err(Error::CorruptEntry(format!(
                "{}: fingerprint {} does not match requested {fingerprint}",
                path.display(),
                header.fingerprint
            )));
        }
        if sha256_hex(body.as_bytes()) != header.checksum {
            return Err(Error::CorruptEntry(format!(
                "{}: checksum mismatch",
                path.display()
            )));
        }
        let layout = header
            .layouts
            .first()
            .ok_or_else(|| Error::CorruptEntry("no layout in header".into()))?;
        let mut examples = Vec::with_capacity(header.n_train + header.n_test);
        for line in body.lines() {
            let parsed: ExampleLine = serde_json::from_str(line)
                .map_err(|e| Error::CorruptEntry(format!("{}: {e}", path.display())))?;
            examples.push(AgentExample {
                observations: parsed
                    .obs
                    .into_iter()
                    .map(|vector| EncodedObservation {
                        vector,
                        layout: layout.clone(),
                    })
                    .collect(),
                label: parsed.label,
            });
        }
        if examples.len() != header.n_train + header.n_test {
            return Err(Error::CorruptEntry(format!(
                "{}: {} examples, header says {}",
                path.display(),
                examples.len(),
                header.n_train + header.n_test
            )));
        }
        let test = examples.split_off(header.n_train);
        Ok(Some(AgentDataset::assemble(
            examples,
            test,
            header.provenance.clone(),
        )?))
    }

    pub fn store_model<T: Serialize>(&self, fingerprint: &str, kind: &str, model: &T) -> Result<PathBuf> {
        let doc = crate::models::serialize::to_model_doc(kind, model)?;
        let path = self.root.join("models").join(format!("{fingerprint}.json"));
        std::fs::write(&path, doc)?;
        Ok(path)
    }

    pub fn load_model<T: DeserializeOwned>(&self, fingerprint: &str, kind: &str) -> Result<Option<T>> {
        let path = self.root.join("models").join(format!("{fingerprint}.json"));
        match std::fs::read_to_string(&path) {
            Ok(text) => Ok(Some(crate::models::serialize::from_model_doc(&text, kind)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn report_path(&self, fingerprint: &str) -> PathBuf {
        self.root.join("reports").join(format!("{fingerprint}.json"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::encode::ObservationLayout;

    fn demo_dataset() -> AgentDataset {
        let layout = ObservationLayout {
            spans: vec![("data-point".into(), 3)],
        };
        let make = |v: Vec<f64>, label: u8| AgentExample {
            observations: vec![EncodedObservation {
                vector: v,
                layout: layout.clone(),
            }],
            label,
        };
        AgentDataset::assemble(
            vec![make(vec![1.0, 2.0, 3.0], 0), make(vec![0.5, 0.25, 0.125], 1)],
            vec![make(vec![-1.0, 0.0, 1.0], 1)],
            Provenance {
                use_case: "toy".into(),
                setting: "baseline".into(),
                generator_digest: "abc".into(),
                seed: 7,
            },
        )
        .unwrap()
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let ds = demo_dataset();
        cache.store_dataset("deadbeef", &ds).unwrap();
        let back = cache.load_dataset("deadbeef").unwrap().unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn absent_entry_is_none() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        assert!(cache.load_dataset("eeee").unwrap().is_none());
    }

    #[test]
    fn tampering_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let ds = demo_dataset();
        let path = cache.store_dataset("deadbeef", &ds).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace("0.25", "0.26")).unwrap();
        assert!(matches!(
            cache.load_dataset("deadbeef"),
            Err(Error::CorruptEntry(_))
        ));
    }

    #[test]
    fn version_mismatch_is_not_silently_reused() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let ds = demo_dataset();
        let path = cache.store_dataset("deadbeef", &ds).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(
            &path,
            text.replace("\"format_version\":1", "\"format_version\":0"),
        )
        .unwrap();
        assert!(matches!(
            cache.load_dataset("deadbeef"),
            Err(Error::VersionMismatch { found: 0, .. })
        ));
    }
}

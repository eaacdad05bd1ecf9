//! Flat-file model store: one JSON document per model id.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use citykpi_core::pipeline::{self, Evaluation, Prepared};
use citykpi_core::{Dataset, ModelKind, TrainConfig, TrainedModel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ServiceError;

/// A trained model with the held-out scores needed for threshold what-ifs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredModel {
    pub id: String,
    pub seed: u64,
    pub test_fraction: f64,
    pub model: TrainedModel,
    /// Row positions, within the cleaned dataset, of the test set.
    pub test_indices: Vec<usize>,
    pub y_test: Vec<u8>,
    pub test_scores: Vec<f64>,
}

impl StoredModel {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn evaluate(&self, threshold: f64) -> citykpi_core::Result<Evaluation> {
        Evaluation::from_scores(&self.y_test, &self.test_scores, threshold)
    }
}

/// `kind-seed-hash`, hashing everything that determines the fitted model.
pub fn model_id(kind: ModelKind, seed: u64, test_fraction: f64, config: &TrainConfig, dataset: &Dataset) -> String {
    let mut h = Sha256::new();
    h.update(kind.as_str().as_bytes());
    h.update(seed.to_le_bytes());
    h.update(test_fraction.to_le_bytes());
    h.update(serde_json::to_vec(config).expect("config serialises"));
    h.update(serde_json::to_vec(dataset).expect("dataset serialises"));
    let digest = hex::encode(h.finalize());
    format!("{kind}-{seed}-{}", &digest[..12])
}

pub fn build(
    id: String,
    kind: ModelKind,
    data: &Prepared,
    config: &TrainConfig,
    trained_at: chrono::DateTime<chrono::Utc>,
) -> citykpi_core::Result<StoredModel> {
    let model = pipeline::train(kind, data, config, trained_at)?;
    let test_scores = model.probabilities(&data.x_test_raw)?;
    Ok(StoredModel {
        id,
        seed: data.split.seed,
        test_fraction: data.split.test_fraction,
        model,
        test_indices: data.split.test_indices.clone(),
        y_test: data.y_test.as_slice().to_vec(),
        test_scores,
    })
}

pub fn path_for(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.json"))
}

pub fn save(dir: &Path, stored: &StoredModel) -> Result<PathBuf, ServiceError> {
    std::fs::create_dir_all(dir)?;
    let path = path_for(dir, &stored.id);
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, serde_json::to_vec_pretty(stored)?)?;
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

pub fn load(path: &Path) -> Result<StoredModel, ServiceError> {
    let stored: StoredModel = serde_json::from_slice(&std::fs::read(path)?)?;
    // Re-run the dimension checks.
    TrainedModel::from_json(&serde_json::to_string(&stored.model)?)?;
    Ok(stored)
}

/// Loads every `*.json` model in `dir`; a missing directory is empty.
pub fn load_all(dir: &Path) -> Result<BTreeMap<String, StoredModel>, ServiceError> {
    let mut out = BTreeMap::new();
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(e.into()),
    };
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            match load(&path) {
                Ok(m) => {
                    out.insert(m.id.clone(), m);
                }
                Err(e) => tracing::warn!("skipping {}: {e}", path.display()),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use citykpi_core::ColumnSchema;

    fn dataset() -> Dataset {
        let schema = vec![ColumnSchema::feature("a"), ColumnSchema::feature("b"), ColumnSchema::target("y")];
        let rows = (0..30)
            .map(|i| {
                let y = (i % 2) as f64;
                vec![Some(y * 2.0 - 1.0 + (i % 5) as f64 * 0.1), Some((i % 4) as f64), Some(y)]
            })
            .collect();
        Dataset::new(schema, rows)
    }

    #[test]
    fn ids_are_stable_and_distinguish_inputs() {
        let ds = dataset();
        let cfg = TrainConfig::default();
        let a = model_id(ModelKind::Bnb, 0, 0.3, &cfg, &ds);
        assert_eq!(a, model_id(ModelKind::Bnb, 0, 0.3, &cfg, &ds));
        assert!(a.starts_with("bnb-0-"));
        assert_ne!(a, model_id(ModelKind::Bnb, 1, 0.3, &cfg, &ds));
        assert_ne!(a, model_id(ModelKind::Svm, 0, 0.3, &cfg, &ds));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = dataset();
        let data = pipeline::prepare(&ds, 0.3, 4).unwrap();
        for kind in ModelKind::ALL {
            let cfg = TrainConfig::default();
            let id = model_id(kind, 4, 0.3, &cfg, &ds);
            let stored = build(id, kind, &data, &cfg, chrono::Utc::now()).unwrap();
            save(dir.path(), &stored).unwrap();
            let back = load(&path_for(dir.path(), &stored.id)).unwrap();
            assert_eq!(back.test_scores, stored.test_scores);
            assert_eq!(back.model.parameters, stored.model.parameters);
            assert_eq!(back.model.probabilities(&data.x_test_raw).unwrap(), stored.test_scores);
        }
        assert_eq!(load_all(dir.path()).unwrap().len(), 5);
        assert!(load_all(&dir.path().join("missing")).unwrap().is_empty());
    }
}

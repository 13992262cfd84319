use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::features::SourceSpec;
use super::toy::ToyModel;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "mixtrain-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub stage: String,
    pub epoch: usize,
    pub dev_metrics: BTreeMap<String, f64>,
    pub selection_score: f64,
}

/// Versioned JSON container for a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub model_id: String,
    pub source: SourceSpec,
    pub run_seed: u64,
    pub model: ToyModel,
    pub provenance: Provenance,
}

impl Checkpoint {
    pub fn new(
        model_id: impl Into<String>,
        source: SourceSpec,
        run_seed: u64,
        model: ToyModel,
        provenance: Provenance,
    ) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            model_id: model_id.into(),
            source,
            run_seed,
            model,
            provenance,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let body = serde_json::to_string(self).map_err(|e| Error::json(path.display().to_string(), e))?;
        fs::write(path, body).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ck: Checkpoint = serde_json::from_str(&body).map_err(|e| Error::json(path.display().to_string(), e))?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "{}: unsupported checkpoint {} v{}",
                path.display(),
                ck.format,
                ck.version
            )));
        }
        if ck.model.input_dim != ck.source.dim || !ck.model.is_finite() {
            return Err(Error::Config(format!(
                "{}: inconsistent or non-finite weights",
                path.display()
            )));
        }
        Ok(ck)
    }
}

/// Hex SHA-256 of the value's JSON serialization.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).unwrap_or_default();
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

//! Versioned model artifact.

use std::path::Path;

use patchem_core::learn::{BorutaResult, Classifier, EnsembleModel, Params, Trial};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub config: PipelineConfig,
    pub patents: Vec<String>,
    pub n_rows: usize,
    /// Every assembled column, before selection.
    pub all_columns: Vec<String>,
    pub boruta: Option<BorutaResult>,
    pub best_params: Params,
    /// Mean leave-one-patent-out loss of the chosen parameters.
    pub best_objective: Option<f64>,
    pub search_history: Vec<Trial>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub schema_version: u32,
    pub feature_columns: Vec<String>,
    #[serde(flatten)]
    pub model: EnsembleModel,
    pub seed: u64,
    pub training_metadata: TrainingMetadata,
}

impl ModelArtifact {
    pub fn new(model: EnsembleModel, seed: u64, training_metadata: TrainingMetadata) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            feature_columns: model.feature_columns().to_vec(),
            model,
            seed,
            training_metadata,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serializes");
        s.push('\n');
        s
    }

    /// Rejects any schema version other than the current one before reading
    /// the rest of the document.
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let json_err = |e: serde_json::Error| Error::Json {
            context: context.to_string(),
            message: e.to_string(),
        };
        let value: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
        match value.get("schema_version") {
            Some(v) if v.as_u64() == Some(u64::from(SCHEMA_VERSION)) => {}
            other => {
                return Err(Error::SchemaVersion {
                    found: other.map_or_else(|| "missing".to_string(), |v| v.to_string()),
                    expected: SCHEMA_VERSION,
                })
            }
        }
        let artifact: ModelArtifact = serde_json::from_value(value).map_err(json_err)?;
        if artifact.feature_columns != artifact.model.feature_columns() {
            return Err(Error::Json {
                context: context.to_string(),
                message: "feature_columns disagree with the embedded models".into(),
            });
        }
        Ok(artifact)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }
}

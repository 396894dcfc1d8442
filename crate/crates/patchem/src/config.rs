//! Pipeline configuration, read from TOML.
//!
//! Every table and key is optional; unknown keys are rejected with their
//! location. The default path comes from `PATCHEM_CONFIG` when set.

use std::path::Path;

use patchem_core::coreid::FeatureSettings;
use patchem_core::learn::{BoostedParams, BorutaConfig, ForestParams, SearchSpace};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONFIG_ENV: &str = "PATCHEM_CONFIG";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Worker threads; `None` uses every logical core.
    pub workers: Option<usize>,
    pub features: FeatureSettings,
    pub train: TrainConfig,
    pub adapters: AdapterConfig,
    pub mcs: McsConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Filter columns with Boruta before training.
    pub boruta: bool,
    pub boruta_config: BorutaConfig,
    /// Tune hyperparameters with Bayesian optimization; otherwise the
    /// `forest`, `boosted` and `forest_weight` values are used as given.
    pub search: bool,
    pub budget: usize,
    pub space: SearchSpace,
    pub forest: ForestParams,
    pub boosted: BoostedParams,
    pub forest_weight: f64,
}

/// Learner search space: tree counts, depth, split sampling, boosting rate,
/// rounds, regularization and ensemble weight.
pub fn default_space() -> SearchSpace {
    SearchSpace::default()
        .integer("n_trees", 100, 800)
        .integer("max_depth", 2, 10)
        .continuous("mtry_fraction", 0.1, 1.0)
        .continuous("learning_rate", 0.01, 0.3)
        .integer("rounds", 50, 400)
        .continuous("lambda", 0.1, 10.0)
        .continuous("forest_weight", 0.0, 1.0)
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            boruta: true,
            boruta_config: BorutaConfig::default(),
            search: true,
            budget: 20,
            space: default_space(),
            forest: ForestParams::default(),
            boosted: BoostedParams::default(),
            forest_weight: 0.5,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdapterConfig {
    /// One command line per recognizer, in model order.
    pub recognizers: Vec<Vec<String>>,
    /// Renderer command; the built-in depiction-record renderer when absent.
    pub renderer: Option<Vec<String>>,
    /// Evaluator command; the built-in fingerprint evaluator when absent.
    pub evaluator: Option<Vec<String>>,
    pub timeout_ms: Option<u64>,
}

impl AdapterConfig {
    pub fn timeout(&self) -> std::time::Duration {
        std::time::Duration::from_millis(self.timeout_ms.unwrap_or(30_000))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McsConfig {
    /// Per-pair search budget.
    pub time_budget_ms: u64,
}

impl Default for McsConfig {
    fn default() -> Self {
        Self { time_budget_ms: 5_000 }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Explicit path, else `PATCHEM_CONFIG`, else defaults.
    pub fn resolve(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let f = &self.features;
        if f.cutoffs.is_empty() {
            return bad("features.cutoffs must not be empty");
        }
        if f.cutoffs.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return bad("features.cutoffs must lie in [0, 1]");
        }
        if f.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return bad("features.cutoffs must be strictly increasing");
        }
        if f.width == 0 {
            return bad("features.width must be positive");
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1");
        }
        if self.train.budget == 0 {
            return bad("train.budget must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.train.forest_weight) {
            return bad("train.forest_weight must lie in [0, 1]");
        }
        if self.adapters.recognizers.iter().any(|c| c.is_empty()) {
            return bad("adapters.recognizers entries must be non-empty commands");
        }
        Ok(())
    }
}

//! OCSR benchmark harness over a JSON-lines manifest.

use std::path::{Path, PathBuf};

use patchem_core::arbiter::{
    candidate_from_output, evaluate_candidates, select_best, Evaluator, FingerprintEvaluator, Issue, Recognizer,
    RecordRenderer, Renderer,
};
use patchem_core::standardize;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adapter::{depiction_from_bytes, SubprocessAdapter};
use crate::config::AdapterConfig;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestItem {
    pub image_path: String,
    pub truth_smiles: String,
}

/// Reads the manifest; relative image paths resolve against its directory.
pub fn read_manifest(path: &Path) -> Result<Vec<(ManifestItem, PathBuf)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut items = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: ManifestItem = serde_json::from_str(line).map_err(|e| Error::Json {
            context: format!("{} line {}", path.display(), k + 1),
            message: e.to_string(),
        })?;
        let resolved = base.join(&item.image_path);
        items.push((item, resolved));
    }
    Ok(items)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub model_id: usize,
    pub raw_smiles: Option<String>,
    pub standardized: Option<String>,
    pub similarity: f64,
    pub valid: bool,
    pub correct: bool,
    pub issue: Option<Issue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub image_path: String,
    pub truth_smiles: String,
    pub final_smiles: Option<String>,
    pub selected_model: Option<usize>,
    pub correct: bool,
    pub candidates: Vec<CandidateSummary>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OcsrReport {
    pub n_items: usize,
    pub n_errors: usize,
    /// Percent of items whose selected SMILES matches the truth.
    pub accuracy: f64,
    /// Percent correct for each recognizer on its own, in model order.
    pub solo_accuracy: Vec<f64>,
    pub items: Vec<ItemResult>,
}

fn percent(hits: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (hits as f64 * 10_000.0 / n as f64).round() / 100.0
}

impl OcsrReport {
    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "## OCSR benchmark ({} images, {} item errors)\n\n| Method | Accuracy |\n|---|---:|\n",
            self.n_items, self.n_errors
        );
        for (i, a) in self.solo_accuracy.iter().enumerate() {
            out.push_str(&format!("| Recognizer {} | {a:.2} |\n", i + 1));
        }
        out.push_str(&format!("| Arbitrated | {:.2} |\n", self.accuracy));
        let failed: Vec<&ItemResult> = self.items.iter().filter(|i| i.error.is_some()).collect();
        if !failed.is_empty() {
            out.push_str("\n| Image | Error |\n|---|---|\n");
            for i in failed {
                out.push_str(&format!(
                    "| {} | {} |\n",
                    i.image_path,
                    i.error.as_deref().unwrap_or_default()
                ));
            }
        }
        out
    }
}

pub type SharedRecognizer = Box<dyn Recognizer + Send + Sync>;

/// Adapters from the configuration, falling back to the built-in renderer
/// and evaluator.
pub struct AdapterSet {
    pub recognizers: Vec<SharedRecognizer>,
    pub renderer: Box<dyn Renderer + Send + Sync>,
    pub evaluator: Box<dyn Evaluator + Send + Sync>,
}

impl AdapterSet {
    pub fn from_config(cfg: &AdapterConfig) -> Self {
        let t = cfg.timeout();
        Self {
            recognizers: cfg
                .recognizers
                .iter()
                .map(|c| Box::new(SubprocessAdapter::new(c.clone(), t)) as SharedRecognizer)
                .collect(),
            renderer: match &cfg.renderer {
                Some(c) => Box::new(SubprocessAdapter::new(c.clone(), t)),
                None => Box::new(RecordRenderer),
            },
            evaluator: match &cfg.evaluator {
                Some(c) => Box::new(SubprocessAdapter::new(c.clone(), t)),
                None => Box::new(FingerprintEvaluator),
            },
        }
    }
}

fn run_item(item: &ManifestItem, path: &Path, adapters: &AdapterSet) -> ItemResult {
    let mut result = ItemResult {
        image_path: item.image_path.clone(),
        truth_smiles: item.truth_smiles.clone(),
        final_smiles: None,
        selected_model: None,
        correct: false,
        candidates: Vec::new(),
        error: None,
    };
    let truth = match standardize(&item.truth_smiles) {
        Ok(t) => t,
        Err(e) => {
            result.error = Some(format!("truth SMILES: {e}"));
            return result;
        }
    };
    let input = match std::fs::read(path)
        .map_err(|e| format!("{}: {e}", path.display()))
        .and_then(|b| depiction_from_bytes(b, Some(item.image_path.clone())).map_err(|e| e.to_string()))
    {
        Ok(d) => d,
        Err(e) => {
            result.error = Some(e);
            return result;
        }
    };
    // adapters run concurrently; candidates come back in model order
    let mut candidates: Vec<_> = adapters
        .recognizers
        .par_iter()
        .enumerate()
        .map(|(i, r)| candidate_from_output(i + 1, r.recognize(&input)))
        .collect();
    evaluate_candidates(
        &input,
        &mut candidates,
        adapters.renderer.as_ref(),
        adapters.evaluator.as_ref(),
    );
    result.candidates = candidates
        .iter()
        .map(|c| CandidateSummary {
            model_id: c.model_id,
            raw_smiles: c.raw_smiles.clone(),
            standardized: c.standardized.clone(),
            similarity: c.similarity,
            valid: c.valid,
            correct: c.standardized.as_deref() == Some(truth.as_str()),
            issue: c.issue.clone(),
        })
        .collect();
    match select_best(candidates) {
        Ok(best) => {
            result.correct = best.final_smiles == truth;
            result.selected_model = Some(best.selected_model);
            result.final_smiles = Some(best.final_smiles);
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    result
}

/// Runs every manifest item; per-item failures are recorded and the batch
/// always completes.
pub fn run_ocsr(items: &[(ManifestItem, PathBuf)], adapters: &AdapterSet) -> Result<OcsrReport> {
    if adapters.recognizers.is_empty() {
        return Err(Error::Usage("at least one recognizer adapter is required".into()));
    }
    let results: Vec<ItemResult> = items
        .par_iter()
        .map(|(item, path)| run_item(item, path, adapters))
        .collect();
    let n = results.len();
    let solo_accuracy = (0..adapters.recognizers.len())
        .map(|m| {
            percent(
                results
                    .iter()
                    .filter(|r| r.candidates.get(m).is_some_and(|c| c.correct))
                    .count(),
                n,
            )
        })
        .collect();
    Ok(OcsrReport {
        n_items: n,
        n_errors: results.iter().filter(|r| r.error.is_some()).count(),
        accuracy: percent(results.iter().filter(|r| r.correct).count(), n),
        solo_accuracy,
        items: results,
    })
}

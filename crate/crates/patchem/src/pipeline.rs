//! Training, ranking and evaluation over patent bundles.

use std::time::{Duration, Instant};

use patchem_core::coreid::{
    assemble_features_with, markdown_table, mcs, rank_core, topk_metrics, CompoundRecord, Deadline, FeatureSettings,
    RankingReport, TopkSummary,
};
use patchem_core::hash::derive_seed;
use patchem_core::learn::{
    bayes_opt, boruta_select, train_boosted, train_forest, BoostedParams, BorutaConfig, Classifier, EnsembleModel,
    FeatureMatrix, ForestParams, LearnError, Params,
};
use patchem_core::write_smiles;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifact::{ModelArtifact, TrainingMetadata};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::ingest::PatentBundle;

/// Stream indices for seed derivation.
const BORUTA_STREAM: u64 = 1;
const SEARCH_STREAM: u64 = 2;
const FOREST_STREAM: u64 = 3;

/// Feature matrix of several patents stacked row-wise, with the patent of
/// each row.
pub struct StackedFeatures {
    pub matrix: FeatureMatrix,
    pub groups: Vec<usize>,
    pub patents: Vec<String>,
}

pub fn stack_features(bundles: &[&PatentBundle], settings: &FeatureSettings) -> Result<StackedFeatures> {
    let per: Vec<FeatureMatrix> = bundles
        .par_iter()
        .map(|b| assemble_features_with(&b.compounds, settings))
        .collect::<std::result::Result<_, _>>()?;
    let columns = settings.columns();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    let mut all_labeled = true;
    for (g, m) in per.iter().enumerate() {
        for i in 0..m.n_rows() {
            values.extend_from_slice(m.row(i));
            groups.push(g);
        }
        match m.labels() {
            Some(l) => labels.extend_from_slice(l),
            None => all_labeled = false,
        }
    }
    let n = groups.len();
    let matrix = FeatureMatrix::from_values(columns, n, values, all_labeled.then_some(labels))?;
    Ok(StackedFeatures {
        matrix,
        groups,
        patents: bundles.iter().map(|b| b.patent_id.clone()).collect(),
    })
}

/// Learner settings after applying a search-space assignment.
#[derive(Clone, Debug)]
pub struct LearnerSettings {
    pub forest: ForestParams,
    pub boosted: BoostedParams,
    pub forest_weight: f64,
}

const KNOWN_PARAMS: [&str; 7] = [
    "n_trees",
    "max_depth",
    "mtry_fraction",
    "learning_rate",
    "rounds",
    "lambda",
    "forest_weight",
];

pub fn apply_params(cfg: &PipelineConfig, params: &Params, n_features: usize) -> LearnerSettings {
    let mut s = LearnerSettings {
        forest: cfg.train.forest.clone(),
        boosted: cfg.train.boosted.clone(),
        forest_weight: cfg.train.forest_weight,
    };
    for (k, &v) in params {
        match k.as_str() {
            "n_trees" => s.forest.n_trees = v as usize,
            "max_depth" => {
                s.forest.max_depth = Some(v as usize);
                s.boosted.max_depth = v as usize;
            }
            "mtry_fraction" => {
                s.forest.mtry = Some(((v * n_features as f64).round() as usize).clamp(1, n_features.max(1)))
            }
            "learning_rate" => s.boosted.learning_rate = v,
            "rounds" => s.boosted.rounds = v as usize,
            "lambda" => s.boosted.lambda = v,
            "forest_weight" => s.forest_weight = v,
            _ => {}
        }
    }
    s
}

pub fn fit_ensemble(x: &FeatureMatrix, s: &LearnerSettings, seed: u64) -> Result<EnsembleModel> {
    let forest = train_forest(x, &s.forest, seed)?;
    let boosted = train_boosted(x, &s.boosted)?;
    Ok(EnsembleModel::new(forest, boosted, s.forest_weight)?)
}

/// Rank loss of one held-out patent: 0 inside the top 10%, rising linearly
/// to 1 at the bottom.
pub fn rank_loss(rank: usize, n: usize) -> f64 {
    let k = (10 * n).div_ceil(100);
    if n <= k {
        return 0.0;
    }
    rank.saturating_sub(k) as f64 / (n - k) as f64
}

/// Mean leave-one-patent-out rank loss.
pub fn loo_objective(data: &StackedFeatures, s: &LearnerSettings, seed: u64) -> Result<f64> {
    let labels = data.matrix.labels().ok_or(LearnError::MissingLabels)?;
    let mut total = 0.0;
    for g in 0..data.patents.len() {
        let train_rows: Vec<usize> = (0..data.groups.len()).filter(|&i| data.groups[i] != g).collect();
        let test_rows: Vec<usize> = (0..data.groups.len()).filter(|&i| data.groups[i] == g).collect();
        let model = fit_ensemble(&data.matrix.rows_subset(&train_rows), s, derive_seed(seed, g as u64))?;
        let test = data.matrix.rows_subset(&test_rows);
        let probs = model.predict_proba(&test)?;
        let ids: Vec<String> = (0..test_rows.len()).map(|i| format!("{i:06}")).collect();
        let core = test_rows.iter().position(|&i| labels[i]).map(|i| ids[i].clone());
        let report = patchem_core::coreid::rank_with_probabilities("", &ids, &probs, core.as_deref());
        total += rank_loss(report.rank_of_core.unwrap_or(test_rows.len()), test_rows.len());
    }
    Ok(total / data.patents.len() as f64)
}

/// Features, optional Boruta filtering, optional hyperparameter search, and
/// the final fit on every labeled patent.
pub fn run_train(bundles: &[PatentBundle], cfg: &PipelineConfig) -> Result<ModelArtifact> {
    let labeled: Vec<&PatentBundle> = bundles.iter().filter(|b| b.is_labeled()).collect();
    if labeled.is_empty() {
        return Err(LearnError::DegenerateLabels.into());
    }
    if labeled.len() < 2 {
        return Err(Error::Data(format!(
            "{} labeled patents, at least 2 required",
            labeled.len()
        )));
    }
    let data = stack_features(&labeled, &cfg.features)?;
    let all_columns = data.matrix.columns().to_vec();

    let boruta = if cfg.train.boruta {
        let bc = BorutaConfig {
            seed: derive_seed(cfg.seed, BORUTA_STREAM),
            ..cfg.train.boruta_config.clone()
        };
        Some(boruta_select(&data.matrix, &bc)?)
    } else {
        None
    };
    let selected = match &boruta {
        Some(r) if !r.selected().is_empty() => r.selected(),
        _ => all_columns.clone(),
    };
    let data = StackedFeatures {
        matrix: data.matrix.subset(&selected)?,
        ..data
    };
    let p = selected.len();
    let forest_seed = derive_seed(cfg.seed, FOREST_STREAM);

    let (best_params, best_objective, history) = if cfg.train.search {
        if let Some(unknown) = cfg
            .train
            .space
            .params
            .iter()
            .find(|s| !KNOWN_PARAMS.contains(&s.name.as_str()))
        {
            return Err(Error::Config(format!("unknown search parameter {}", unknown.name)));
        }
        let mut failure: Option<Error> = None;
        let result = bayes_opt(
            &cfg.train.space,
            cfg.train.budget,
            derive_seed(cfg.seed, SEARCH_STREAM),
            |params| {
                let s = apply_params(cfg, params, p);
                match loo_objective(&data, &s, forest_seed) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::INFINITY
                    }
                }
            },
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        (result.best.params.clone(), Some(result.best.objective), result.history)
    } else {
        (Params::new(), None, Vec::new())
    };

    let settings = apply_params(cfg, &best_params, p);
    let model = fit_ensemble(&data.matrix, &settings, forest_seed)?;
    // the worker count never changes results, so it is not part of the echo
    let metadata = TrainingMetadata {
        config: PipelineConfig {
            workers: None,
            ..cfg.clone()
        },
        patents: data.patents.clone(),
        n_rows: data.matrix.n_rows(),
        all_columns,
        boruta,
        best_params,
        best_objective,
        search_history: history,
    };
    Ok(ModelArtifact::new(model, cfg.seed, metadata))
}

/// Wall-clock deadline for the scaffold search.
pub struct TimeDeadline {
    end: Instant,
    calls: u32,
}

impl TimeDeadline {
    pub fn after(d: Duration) -> Self {
        Self {
            end: Instant::now() + d,
            calls: 0,
        }
    }
}

impl Deadline for TimeDeadline {
    fn expired(&mut self) -> bool {
        self.calls = self.calls.wrapping_add(1);
        self.calls.is_multiple_of(256) && Instant::now() >= self.end
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldSummary {
    pub smiles: String,
    pub atoms: usize,
    pub coverage: f64,
    pub search_exhausted: bool,
    /// Compounds the scaffold was computed over.
    pub compound_ids: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOutput {
    pub report: RankingReport,
    pub scaffold: Option<ScaffoldSummary>,
}

impl RankOutput {
    pub fn to_markdown(&self) -> String {
        let mut out = self.report.to_markdown();
        if let Some(s) = &self.scaffold {
            out.push_str(&format!(
                "\nCommon scaffold of the top {} compounds: `{}` ({} atoms, coverage {:.2}{})\n",
                s.compound_ids.len(),
                s.smiles,
                s.atoms,
                s.coverage,
                if s.search_exhausted {
                    ""
                } else {
                    ", search stopped at the time budget"
                }
            ));
        }
        out
    }
}

/// Ranks one patent. With `scaffold_top` set, the common substructure of
/// that many top-ranked compounds is reported alongside.
pub fn run_rank(bundle: &PatentBundle, artifact: &ModelArtifact, scaffold_top: Option<usize>) -> Result<RankOutput> {
    let settings = &artifact.training_metadata.config.features;
    let report = rank_core(&bundle.compounds, &artifact.model, settings)?;
    let scaffold = match scaffold_top {
        Some(k) if k >= 1 => {
            let top: Vec<&CompoundRecord> = report
                .ranking
                .iter()
                .take(k)
                .filter_map(|r| bundle.compounds.iter().find(|c| c.compound_id == r.compound_id))
                .collect();
            let mols = top
                .iter()
                .map(|c| c.molecule())
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let budget = Duration::from_millis(artifact.training_metadata.config.mcs.time_budget_ms);
            let mut deadline = TimeDeadline::after(budget * mols.len().max(1) as u32);
            let r = mcs(&mols, &mut deadline);
            Some(ScaffoldSummary {
                smiles: write_smiles(&r.scaffold),
                atoms: r.scaffold.atom_count(),
                coverage: r.coverage,
                search_exhausted: r.search_exhausted,
                compound_ids: top.iter().map(|c| c.compound_id.clone()).collect(),
            })
        }
        _ => None,
    };
    Ok(RankOutput { report, scaffold })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_label: String,
    pub reports: Vec<RankingReport>,
    pub summary: TopkSummary,
    pub mean_core_rank: f64,
}

impl EvalReport {
    pub fn to_markdown(&self, include_top1pct: bool) -> String {
        let mut out = format!("## Core identification over {} patents\n\n", self.reports.len());
        out.push_str(&markdown_table(
            &[(self.model_label.clone(), self.summary.clone())],
            include_top1pct,
        ));
        out.push_str(&format!(
            "\nMean core rank: {:.2}\n\n| Patent | Compounds | Core rank |\n|---|---:|---:|\n",
            self.mean_core_rank
        ));
        for r in &self.reports {
            out.push_str(&format!(
                "| {} | {} | {} |\n",
                r.patent_id,
                r.n_compounds,
                r.rank_of_core.map_or("-".to_string(), |k| k.to_string())
            ));
        }
        out
    }
}

/// Ranks every labeled bundle and aggregates Top-k percentages.
pub fn run_eval(bundles: &[PatentBundle], artifact: &ModelArtifact, label: &str) -> Result<EvalReport> {
    let labeled: Vec<&PatentBundle> = bundles.iter().filter(|b| b.is_labeled()).collect();
    if labeled.is_empty() {
        return Err(Error::Data("no labeled patents to evaluate".into()));
    }
    let reports: Vec<RankingReport> = labeled
        .par_iter()
        .map(|b| run_rank(b, artifact, None).map(|o| o.report))
        .collect::<Result<_>>()?;
    let summary = topk_metrics(&reports)?;
    let mean_core_rank = reports
        .iter()
        .map(|r| r.rank_of_core.unwrap_or(r.n_compounds) as f64)
        .sum::<f64>()
        / reports.len() as f64;
    Ok(EvalReport {
        model_label: label.to_string(),
        reports,
        summary,
        mean_core_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_loss_shape() {
        assert_eq!(rank_loss(1, 14), 0.0);
        assert_eq!(rank_loss(2, 14), 0.0);
        assert_eq!(rank_loss(14, 14), 1.0);
        assert_eq!(rank_loss(1, 1), 0.0);
    }
}

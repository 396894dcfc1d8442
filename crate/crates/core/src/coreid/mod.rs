//! Core-compound identification within a patent.
//!
//! Each compound gets nine descriptors plus six network features at every
//! similarity cutoff. A trained classifier scores the compounds, the scores
//! rank them, and Top-k metrics summarize where the labeled core landed.

mod mcs;
mod metrics;

pub use mcs::{
    bond_orders, contains_substructure, mcs, mcs_pair, Deadline, NoDeadline, NodeBudget, PairMatch, ScaffoldResult,
};
pub use metrics::{
    markdown_table, percent_k, rank_with_probabilities, topk_metrics, RankedCompound, RankingReport, TopkFlags,
    TopkSummary,
};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chem::{parse_smiles, standardize_molecule, write_smiles, Molecule, ParseDiagnostic};
use crate::feat::{descriptors, ecfp, DescriptorVector, FeatError, Fingerprint, DEFAULT_RADIUS, DEFAULT_WIDTH};
use crate::learn::{Classifier, FeatureMatrix, LearnError};
use crate::simnet::{network_features, similarity_matrix, NodeFeatures, SimilarityGraph, SimnetError, CUTOFF_GRID};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CoreIdError {
    #[error("compound {compound_id}: {diagnostic}")]
    Parse {
        compound_id: String,
        diagnostic: ParseDiagnostic,
    },
    #[error("{0} compounds, at least 2 required")]
    TooFewCompounds(usize),
    #[error("duplicate compound id {0}")]
    DuplicateCompoundId(String),
    #[error("report for patent {0} has no labeled core")]
    UnlabeledReport(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Feature(#[from] FeatError),
    #[error(transparent)]
    Network(#[from] SimnetError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompoundRecord {
    pub patent_id: String,
    pub compound_id: String,
    pub smiles: String,
    pub canonical_smiles: String,
    pub is_core: Option<bool>,
}

impl CompoundRecord {
    /// Parses `smiles` and fills in the canonical form.
    pub fn new(patent_id: &str, compound_id: &str, smiles: &str, is_core: Option<bool>) -> Result<Self, CoreIdError> {
        let m = parse_record(compound_id, smiles)?;
        Ok(Self {
            patent_id: patent_id.into(),
            compound_id: compound_id.into(),
            smiles: smiles.into(),
            canonical_smiles: write_smiles(&m),
            is_core,
        })
    }

    pub fn molecule(&self) -> Result<Molecule, CoreIdError> {
        parse_record(&self.compound_id, &self.smiles)
    }
}

fn parse_record(compound_id: &str, smiles: &str) -> Result<Molecule, CoreIdError> {
    parse_smiles(smiles)
        .map(|m| standardize_molecule(&m))
        .map_err(|diagnostic| CoreIdError::Parse {
            compound_id: compound_id.into(),
            diagnostic,
        })
}

/// Fingerprint and network settings for feature assembly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSettings {
    pub radius: u32,
    pub width: usize,
    pub cutoffs: Vec<f64>,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        Self {
            radius: DEFAULT_RADIUS,
            width: DEFAULT_WIDTH,
            cutoffs: CUTOFF_GRID.to_vec(),
        }
    }
}

impl FeatureSettings {
    /// The nine descriptors, then for each cutoff the six network features
    /// named `<feature>@<cutoff>`.
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = DescriptorVector::NAMES.iter().map(|s| String::from(*s)).collect();
        for c in &self.cutoffs {
            for name in NodeFeatures::NAMES {
                cols.push(format!("{name}@{c:.1}"));
            }
        }
        cols
    }
}

/// Column order of [`assemble_features`] under default settings (45
/// columns).
pub fn feature_columns() -> Vec<String> {
    FeatureSettings::default().columns()
}

/// Per-compound inputs to the network stage.
pub struct PreparedCompound {
    pub molecule: Molecule,
    pub fingerprint: Fingerprint,
    pub descriptors: DescriptorVector,
}

pub fn prepare(record: &CompoundRecord, settings: &FeatureSettings) -> Result<PreparedCompound, CoreIdError> {
    let molecule = record.molecule()?;
    let fingerprint = ecfp(&molecule, settings.radius, settings.width)?;
    let descriptors = descriptors(&molecule);
    Ok(PreparedCompound {
        molecule,
        fingerprint,
        descriptors,
    })
}

/// N x 45 feature matrix, rows in input order. Labels are attached when
/// every record carries one.
pub fn assemble_features(records: &[CompoundRecord]) -> Result<FeatureMatrix, CoreIdError> {
    assemble_features_with(records, &FeatureSettings::default())
}

pub fn assemble_features_with(
    records: &[CompoundRecord],
    settings: &FeatureSettings,
) -> Result<FeatureMatrix, CoreIdError> {
    if records.len() < 2 {
        return Err(CoreIdError::TooFewCompounds(records.len()));
    }
    let mut ids: Vec<&str> = records.iter().map(|r| r.compound_id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(CoreIdError::DuplicateCompoundId(w[0].into()));
    }
    let prepared: Vec<PreparedCompound> = records.iter().map(|r| prepare(r, settings)).collect::<Result<_, _>>()?;
    let fps: Vec<Fingerprint> = prepared.iter().map(|p| p.fingerprint.clone()).collect();
    let sim = similarity_matrix(&fps)?;
    let node_ids: Vec<String> = records.iter().map(|r| r.compound_id.clone()).collect();

    let n = records.len();
    let mut rows: Vec<Vec<f64>> = prepared.iter().map(|p| p.descriptors.to_array().to_vec()).collect();
    for &c in &settings.cutoffs {
        let g = SimilarityGraph::from_similarities(node_ids.clone(), &sim, c)?;
        let feats = network_features(&g);
        for i in 0..n {
            rows[i].extend_from_slice(&feats[i].to_array());
        }
    }
    let labels = records.iter().map(|r| r.is_core).collect::<Option<Vec<bool>>>();
    Ok(FeatureMatrix::new(settings.columns(), rows, labels)?)
}

/// Scores one patent's compounds with `model` and ranks them. The model may
/// use any subset of the assembled columns.
pub fn rank_core(
    records: &[CompoundRecord],
    model: &impl Classifier,
    settings: &FeatureSettings,
) -> Result<RankingReport, CoreIdError> {
    let x = assemble_features_with(records, settings)?;
    let probs = model.predict_proba(&x.subset(model.feature_columns())?)?;
    let ids: Vec<String> = records.iter().map(|r| r.compound_id.clone()).collect();
    let core = records
        .iter()
        .find(|r| r.is_core == Some(true))
        .map(|r| r.compound_id.as_str());
    let patent = records.first().map(|r| r.patent_id.as_str()).unwrap_or_default();
    Ok(rank_with_probabilities(patent, &ids, &probs, core))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, smi: &str, core: bool) -> CompoundRecord {
        CompoundRecord::new("P1", id, smi, Some(core)).unwrap()
    }

    #[test]
    fn forty_five_documented_columns() {
        let cols = feature_columns();
        assert_eq!(cols.len(), 45);
        assert_eq!(cols[0], "molecular_weight");
        assert_eq!(cols[9], "degree@0.4");
        assert_eq!(cols[44], "pagerank@0.9");
    }

    #[test]
    fn duplicate_structures_give_identical_rows() {
        let recs = [
            rec("a", "CCO", false),
            rec("b", "OCC", true),
            rec("c", "c1ccccc1", false),
        ];
        let x = assemble_features(&recs).unwrap();
        assert_eq!(x.n_rows(), 3);
        assert_eq!(x.row(0), x.row(1));
        assert_eq!(x.labels().unwrap(), &[false, true, false]);
    }

    #[test]
    fn parse_error_names_compound() {
        let good = rec("a", "CCO", false);
        let bad = CompoundRecord {
            smiles: "C1CC".into(),
            compound_id: "broken".into(),
            ..good.clone()
        };
        match assemble_features(&[good, bad]) {
            Err(CoreIdError::Parse { compound_id, .. }) => assert_eq!(compound_id, "broken"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn needs_two_unique_compounds() {
        assert_eq!(
            assemble_features(&[rec("a", "C", false)]).unwrap_err(),
            CoreIdError::TooFewCompounds(1)
        );
        assert_eq!(
            assemble_features(&[rec("a", "C", false), rec("a", "CC", false)]).unwrap_err(),
            CoreIdError::DuplicateCompoundId("a".into())
        );
    }
}

//! Boruta all-relevant feature selection.
//!
//! Each iteration appends a shuffled copy ("shadow") of every feature that
//! has not been rejected, trains a forest, and scores a hit for every real
//! feature whose importance beats the best shadow. A two-sided binomial
//! test with Bonferroni correction then confirms or rejects features.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{both_classes, check_labels, train_forest, FeatureMatrix, ForestParams, LearnError};
use crate::hash::derive_seed;
use crate::math;

pub const MIN_ROWS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BorutaConfig {
    pub max_iter: usize,
    pub alpha: f64,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    /// Lower bound on the number of shadow columns per iteration.
    pub min_shadows: usize,
    pub seed: u64,
}

impl Default for BorutaConfig {
    fn default() -> Self {
        Self {
            max_iter: 100,
            alpha: 0.05,
            n_trees: 100,
            max_depth: Some(7),
            min_shadows: 5,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureStatus {
    Confirmed,
    Rejected,
    Tentative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorutaResult {
    pub features: Vec<String>,
    pub statuses: Vec<FeatureStatus>,
    pub hit_counts: Vec<usize>,
    pub iterations_run: usize,
}

impl BorutaResult {
    fn with_status(&self, s: FeatureStatus) -> Vec<String> {
        self.features
            .iter()
            .zip(&self.statuses)
            .filter(|(_, &st)| st == s)
            .map(|(f, _)| f.clone())
            .collect()
    }

    pub fn confirmed(&self) -> Vec<String> {
        self.with_status(FeatureStatus::Confirmed)
    }

    pub fn rejected(&self) -> Vec<String> {
        self.with_status(FeatureStatus::Rejected)
    }

    pub fn tentative(&self) -> Vec<String> {
        self.with_status(FeatureStatus::Tentative)
    }

    /// Confirmed and tentative features in input order.
    pub fn selected(&self) -> Vec<String> {
        self.features
            .iter()
            .zip(&self.statuses)
            .filter(|(_, &st)| st != FeatureStatus::Rejected)
            .map(|(f, _)| f.clone())
            .collect()
    }
}

/// Upper and lower binomial tails `(P[X >= k], P[X <= k])` for X ~ Bin(n, 1/2).
fn binomial_tails(n: usize, k: usize) -> (f64, f64) {
    let ln_half_n = -(n as f64) * core::f64::consts::LN_2;
    let ln_choose =
        |j: usize| math::lgamma(n as f64 + 1.0) - math::lgamma(j as f64 + 1.0) - math::lgamma((n - j) as f64 + 1.0);
    let pmf = |j: usize| math::exp(ln_choose(j) + ln_half_n);
    let upper: f64 = (k..=n).map(pmf).sum();
    let lower: f64 = (0..=k).map(pmf).sum();
    (upper.min(1.0), lower.min(1.0))
}

pub fn boruta_select(x: &FeatureMatrix, config: &BorutaConfig) -> Result<BorutaResult, LearnError> {
    let labels = check_labels(x)?;
    if x.n_rows() < MIN_ROWS {
        return Err(LearnError::TooFewRows {
            rows: x.n_rows(),
            min: MIN_ROWS,
        });
    }
    if !both_classes(labels) {
        return Err(LearnError::DegenerateLabels);
    }
    if config.max_iter == 0 || config.n_trees == 0 {
        return Err(LearnError::InvalidParameter(
            "max_iter and n_trees must be at least 1".into(),
        ));
    }
    let p = x.n_cols();
    let n = x.n_rows();
    let mut statuses = alloc::vec![FeatureStatus::Tentative; p];
    let mut hits = alloc::vec![0usize; p];
    let threshold = config.alpha / p.max(1) as f64;
    let forest_params = ForestParams {
        n_trees: config.n_trees,
        max_depth: config.max_depth,
        ..Default::default()
    };
    let mut iterations = 0;

    while iterations < config.max_iter && statuses.contains(&FeatureStatus::Tentative) {
        let active: Vec<usize> = (0..p).filter(|&j| statuses[j] != FeatureStatus::Rejected).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 2 * iterations as u64));
        let n_shadow = active.len().max(config.min_shadows);
        let shadows: Vec<Vec<f64>> = (0..n_shadow)
            .map(|s| {
                let mut col = x.column(active[s % active.len()]);
                col.shuffle(&mut rng);
                col
            })
            .collect();
        let mut columns: Vec<String> = active.iter().map(|&j| x.columns()[j].clone()).collect();
        columns.extend((0..n_shadow).map(|s| format!("\u{1}shadow{s}")));
        let width = columns.len();
        let mut values = Vec::with_capacity(n * width);
        for i in 0..n {
            values.extend(active.iter().map(|&j| x.get(i, j)));
            values.extend(shadows.iter().map(|c| c[i]));
        }
        let augmented = FeatureMatrix::from_values(columns, n, values, Some(labels.to_vec()))?;
        let forest = train_forest(
            &augmented,
            &forest_params,
            derive_seed(config.seed, 2 * iterations as u64 + 1),
        )?;
        let imp = &forest.importances;
        let max_shadow = imp[active.len()..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (k, &j) in active.iter().enumerate() {
            if imp[k] > max_shadow {
                hits[j] += 1;
            }
        }
        iterations += 1;

        for j in 0..p {
            if statuses[j] != FeatureStatus::Tentative {
                continue;
            }
            let (upper, lower) = binomial_tails(iterations, hits[j]);
            if 2.0 * upper < threshold && 2 * hits[j] > iterations {
                statuses[j] = FeatureStatus::Confirmed;
            } else if 2.0 * lower < threshold && 2 * hits[j] < iterations {
                statuses[j] = FeatureStatus::Rejected;
            }
        }
    }

    Ok(BorutaResult {
        features: x.columns().to_vec(),
        statuses,
        hit_counts: hits,
        iterations_run: iterations,
    })
}

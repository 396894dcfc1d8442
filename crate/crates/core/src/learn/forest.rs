use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, Sample, Tree, TreeConfig};
use super::{check_labels, par_map, Classifier, FeatureMatrix, LearnError};
use crate::hash::derive_seed;
use crate::math;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means ⌊√p⌋.
    pub mtry: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub bootstrap: bool,
    /// Weight of positive rows relative to negative ones.
    pub positive_weight: f64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 500,
            mtry: None,
            max_depth: None,
            min_leaf: 1,
            bootstrap: true,
            positive_weight: 1.0,
        }
    }
}

impl ForestParams {
    pub fn resolved_mtry(&self, p: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| math::floor(math::sqrt(p as f64)) as usize)
            .clamp(1, p.max(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub feature_columns: Vec<String>,
    pub params: ForestParams,
    pub seed: u64,
    pub trees: Vec<Tree>,
    /// Mean impurity decrease per feature, averaged over trees.
    pub importances: Vec<f64>,
}

/// Random forest of Gini trees. Tree `t` draws from its own stream seeded by
/// `derive_seed(seed, t)`, so the model does not depend on thread count.
pub fn train_forest(x: &FeatureMatrix, params: &ForestParams, seed: u64) -> Result<ForestModel, LearnError> {
    let labels = check_labels(x)?;
    if params.n_trees == 0 {
        return Err(LearnError::InvalidParameter("n_trees must be at least 1".into()));
    }
    if !(params.positive_weight.is_finite() && params.positive_weight > 0.0) {
        return Err(LearnError::InvalidParameter("positive_weight must be positive".into()));
    }
    let n = x.n_rows();
    if n == 0 {
        return Err(LearnError::TooFewRows { rows: 0, min: 1 });
    }
    let p = x.n_cols();
    let cfg = TreeConfig {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        mtry: params.resolved_mtry(p),
        criterion: Criterion::Gini,
    };
    let value = |r: usize, f: usize| x.get(r, f);

    let grown = par_map(params.n_trees, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
        let mut counts = vec![0u32; n];
        if params.bootstrap {
            for _ in 0..n {
                counts[rng.gen_range(0..n)] += 1;
            }
        } else {
            counts.fill(1);
        }
        let samples: Vec<Sample> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(row, &c)| {
                let w = f64::from(c) * if labels[row] { params.positive_weight } else { 1.0 };
                Sample {
                    row,
                    a: w,
                    b: if labels[row] { w } else { 0.0 },
                }
            })
            .collect();
        let total: f64 = samples.iter().map(|s| s.a).sum();
        let mut imp = vec![0.0; p];
        let tree = grow(&value, p, &samples, &cfg, &mut rng, &mut imp);
        for v in &mut imp {
            *v /= total;
        }
        (tree, imp)
    });

    let mut importances = vec![0.0; p];
    let mut trees = Vec::with_capacity(grown.len());
    for (tree, imp) in grown {
        for (acc, v) in importances.iter_mut().zip(imp) {
            *acc += v;
        }
        trees.push(tree);
    }
    for v in &mut importances {
        *v /= trees.len() as f64;
    }
    Ok(ForestModel {
        feature_columns: x.columns().to_vec(),
        params: params.clone(),
        seed,
        trees,
        importances,
    })
}

impl Classifier for ForestModel {
    fn feature_columns(&self) -> &[String] {
        &self.feature_columns
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        (sum / self.trees.len() as f64).clamp(0.0, 1.0)
    }
}

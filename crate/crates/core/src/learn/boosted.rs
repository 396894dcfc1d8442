use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, Sample, Tree, TreeConfig};
use super::{both_classes, check_labels, Classifier, FeatureMatrix, LearnError};
use crate::math;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostedParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
    pub min_leaf: usize,
    pub positive_weight: f64,
}

impl Default for BoostedParams {
    fn default() -> Self {
        Self {
            rounds: 200,
            learning_rate: 0.1,
            max_depth: 6,
            lambda: 1.0,
            min_leaf: 1,
            positive_weight: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub feature_columns: Vec<String>,
    pub params: BoostedParams,
    /// Prior log-odds of the positive class.
    pub base_score: f64,
    /// Leaf values already include the learning rate.
    pub trees: Vec<Tree>,
    /// Weighted mean training log-loss after initialization and after each
    /// round.
    pub loss_history: Vec<f64>,
}

fn log_loss(scores: &[f64], labels: &[bool], weights: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut wsum = 0.0;
    for ((&s, &y), &w) in scores.iter().zip(labels).zip(weights) {
        // -log sigmoid(±s), computed stably
        let m = if y { -s } else { s };
        let l = if m > 0.0 {
            m + math::ln(1.0 + math::exp(-m))
        } else {
            math::ln(1.0 + math::exp(m))
        };
        total += w * l;
        wsum += w;
    }
    total / wsum
}

/// Newton boosting on the logistic loss. Each round fits a tree to the
/// gradients and hessians of the current scores with leaf value
/// `-G / (H + lambda)`, shrunk by the learning rate.
pub fn train_boosted(x: &FeatureMatrix, params: &BoostedParams) -> Result<BoostedModel, LearnError> {
    let labels = check_labels(x)?;
    if !both_classes(labels) {
        return Err(LearnError::DegenerateLabels);
    }
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(LearnError::InvalidParameter("learning_rate must be positive".into()));
    }
    if !(params.lambda >= 0.0 && params.lambda.is_finite()) {
        return Err(LearnError::InvalidParameter("lambda must be non-negative".into()));
    }
    if !(params.positive_weight.is_finite() && params.positive_weight > 0.0) {
        return Err(LearnError::InvalidParameter("positive_weight must be positive".into()));
    }
    let n = x.n_rows();
    let p = x.n_cols();
    let weights: Vec<f64> = labels
        .iter()
        .map(|&y| if y { params.positive_weight } else { 1.0 })
        .collect();
    let wsum: f64 = weights.iter().sum();
    let wpos: f64 = labels.iter().zip(&weights).filter(|(y, _)| **y).map(|(_, w)| w).sum();
    let prior = wpos / wsum;
    let base_score = math::ln(prior / (1.0 - prior));

    let cfg = TreeConfig {
        max_depth: Some(params.max_depth),
        min_leaf: params.min_leaf,
        mtry: p,
        criterion: Criterion::Newton { lambda: params.lambda },
    };
    // all features are tried at every split, so the stream is never consulted
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let value = |r: usize, f: usize| x.get(r, f);
    let mut scores = vec![base_score; n];
    let mut trees = Vec::with_capacity(params.rounds);
    let mut loss_history = vec![log_loss(&scores, labels, &weights)];
    let mut importance = vec![0.0; p];
    for _ in 0..params.rounds {
        let samples: Vec<Sample> = (0..n)
            .map(|i| {
                let prob = math::sigmoid(scores[i]);
                let y = if labels[i] { 1.0 } else { 0.0 };
                Sample {
                    row: i,
                    a: weights[i] * (prob - y),
                    b: weights[i] * prob * (1.0 - prob),
                }
            })
            .collect();
        let mut tree = grow(&value, p, &samples, &cfg, &mut rng, &mut importance);
        tree.scale_leaves(params.learning_rate);
        for (i, s) in scores.iter_mut().enumerate() {
            *s += tree.predict(x.row(i));
        }
        loss_history.push(log_loss(&scores, labels, &weights));
        trees.push(tree);
    }
    Ok(BoostedModel {
        feature_columns: x.columns().to_vec(),
        params: params.clone(),
        base_score,
        trees,
        loss_history,
    })
}

impl BoostedModel {
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }
}

impl Classifier for BoostedModel {
    fn feature_columns(&self) -> &[String] {
        &self.feature_columns
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        math::sigmoid(self.raw_score(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn threshold_data() -> FeatureMatrix {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 40.0]).collect();
        let labels = (0..40).map(|i| i as f64 / 40.0 > 0.62).collect();
        FeatureMatrix::new(vec!["x".to_string()], rows, Some(labels)).unwrap()
    }

    #[test]
    fn zero_rounds_predict_prior() {
        let x = threshold_data();
        let m = train_boosted(
            &x,
            &BoostedParams {
                rounds: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let prior = x.labels().unwrap().iter().filter(|&&y| y).count() as f64 / 40.0;
        for p in m.predict_proba(&x).unwrap() {
            assert!((p - prior).abs() < 1e-12);
        }
    }

    #[test]
    fn stumps_fit_threshold() {
        let x = threshold_data();
        let m = train_boosted(
            &x,
            &BoostedParams {
                rounds: 50,
                max_depth: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let p = m.predict_proba(&x).unwrap();
        assert!(p.iter().zip(x.labels().unwrap()).all(|(p, &y)| (*p >= 0.5) == y));
        assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn single_class_rejected() {
        let x = FeatureMatrix::new(vec!["a".to_string()], vec![vec![1.0], vec![2.0]], Some(vec![false; 2])).unwrap();
        assert_eq!(
            train_boosted(&x, &BoostedParams::default()).unwrap_err(),
            LearnError::DegenerateLabels
        );
    }
}

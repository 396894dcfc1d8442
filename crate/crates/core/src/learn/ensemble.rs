use alloc::string::String;

use serde::{Deserialize, Serialize};

use super::{BoostedModel, Classifier, ForestModel, LearnError};

/// Convex combination `w_f * forest + w_b * boosted`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub forest: ForestModel,
    pub boosted: BoostedModel,
    weights: (f64, f64),
}

impl EnsembleModel {
    /// `forest_weight` in [0, 1]; the boosted model receives the rest. Both
    /// sub-models must share the same feature columns.
    pub fn new(forest: ForestModel, boosted: BoostedModel, forest_weight: f64) -> Result<Self, LearnError> {
        if !(0.0..=1.0).contains(&forest_weight) {
            return Err(LearnError::InvalidParameter("forest weight must lie in [0, 1]".into()));
        }
        if forest.feature_columns != boosted.feature_columns {
            return Err(LearnError::InvalidParameter(
                "sub-models use different feature columns".into(),
            ));
        }
        Ok(Self {
            forest,
            boosted,
            weights: (forest_weight, 1.0 - forest_weight),
        })
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn with_weights(forest: ForestModel, boosted: BoostedModel, w_f: f64, w_b: f64) -> Result<Self, LearnError> {
        let total = w_f + w_b;
        if !(w_f >= 0.0 && w_b >= 0.0 && total > 0.0 && total.is_finite()) {
            return Err(LearnError::InvalidParameter(
                "weights must be non-negative with a positive sum".into(),
            ));
        }
        Self::new(forest, boosted, w_f / total)
    }

    pub fn weights(&self) -> (f64, f64) {
        self.weights
    }
}

impl Classifier for EnsembleModel {
    fn feature_columns(&self) -> &[String] {
        &self.forest.feature_columns
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        let (wf, wb) = self.weights;
        let f = if wf > 0.0 { self.forest.predict_row(row) } else { 0.0 };
        let b = if wb > 0.0 { self.boosted.predict_row(row) } else { 0.0 };
        if wb == 0.0 {
            return f;
        }
        if wf == 0.0 {
            return b;
        }
        (wf * f + wb * b).clamp(f.min(b), f.max(b))
    }
}

//! Tree ensembles, Boruta feature selection and Bayesian hyperparameter
//! search, written from scratch over a small dense feature matrix.

mod bayes;
mod boosted;
mod boruta;
mod ensemble;
mod forest;
mod matrix;
mod tree;

pub use bayes::{bayes_opt, OptResult, ParamKind, ParamSpec, Params, SearchSpace, Trial, INITIAL_TRIALS};
pub use boosted::{train_boosted, BoostedModel, BoostedParams};
pub use boruta::{boruta_select, BorutaConfig, BorutaResult, FeatureStatus};
pub use ensemble::EnsembleModel;
pub use forest::{train_forest, ForestModel, ForestParams};
pub use matrix::FeatureMatrix;
pub use tree::{Node, Tree};

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LearnError {
    #[error("row {row} has {found} values, expected {expected}")]
    NotRectangular { row: usize, expected: usize, found: usize },
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: String },
    #[error("duplicate column name {0}")]
    DuplicateColumn(String),
    #[error("{labels} labels for {rows} rows")]
    LabelCount { rows: usize, labels: usize },
    #[error("feature matrix has no labels")]
    MissingLabels,
    #[error("labels contain a single class")]
    DegenerateLabels,
    #[error("{rows} rows, at least {min} required")]
    TooFewRows { rows: usize, min: usize },
    #[error("column mismatch: missing {missing:?}, extra {extra:?}")]
    ColumnMismatch { missing: Vec<String>, extra: Vec<String> },
    #[error("search space has no parameters")]
    EmptySpace,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A trained binary classifier over named columns.
pub trait Classifier {
    fn feature_columns(&self) -> &[String];

    /// Probability of the positive class for one row laid out in
    /// `feature_columns` order.
    fn predict_row(&self, row: &[f64]) -> f64;

    /// Per-row probabilities. Columns of `x` are matched by name, so order
    /// may differ from training.
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>, LearnError> {
        let aligned = x.select(self.feature_columns())?;
        Ok((0..aligned.n_rows())
            .map(|i| self.predict_row(aligned.row(i)))
            .collect())
    }
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
/// Output order is always index order.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

pub(crate) fn check_labels(x: &FeatureMatrix) -> Result<&[bool], LearnError> {
    x.labels().ok_or(LearnError::MissingLabels)
}

pub(crate) fn both_classes(labels: &[bool]) -> bool {
    labels.iter().any(|&y| y) && labels.iter().any(|&y| !y)
}

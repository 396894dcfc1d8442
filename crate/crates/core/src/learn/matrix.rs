use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LearnError;

/// Dense row-major matrix of finite values with unique column names and
/// optional binary labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    columns: Vec<String>,
    n_rows: usize,
    values: Vec<f64>,
    labels: Option<Vec<bool>>,
}

impl FeatureMatrix {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>, labels: Option<Vec<bool>>) -> Result<Self, LearnError> {
        let p = columns.len();
        let mut values = Vec::with_capacity(rows.len() * p);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(LearnError::NotRectangular {
                    row: r,
                    expected: p,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_values(columns, rows.len(), values, labels)
    }

    /// Builds from a flat row-major buffer.
    pub fn from_values(
        columns: Vec<String>,
        n_rows: usize,
        values: Vec<f64>,
        labels: Option<Vec<bool>>,
    ) -> Result<Self, LearnError> {
        let p = columns.len();
        let mut seen = BTreeSet::new();
        for c in &columns {
            if !seen.insert(c.as_str()) {
                return Err(LearnError::DuplicateColumn(c.clone()));
            }
        }
        if values.len() != n_rows * p {
            return Err(LearnError::NotRectangular {
                row: n_rows,
                expected: n_rows * p,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(LearnError::NonFinite {
                row: pos / p,
                column: columns[pos % p].clone(),
            });
        }
        if let Some(l) = &labels {
            if l.len() != n_rows {
                return Err(LearnError::LabelCount {
                    rows: n_rows,
                    labels: l.len(),
                });
            }
        }
        Ok(Self {
            columns,
            n_rows,
            values,
            labels,
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Option<Vec<bool>>) -> Result<Self, LearnError> {
        if let Some(l) = &labels {
            if l.len() != self.n_rows {
                return Err(LearnError::LabelCount {
                    rows: self.n_rows,
                    labels: l.len(),
                });
            }
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Reorders to exactly `names`. Any missing name or any column not in
    /// `names` is a [`LearnError::ColumnMismatch`].
    pub fn select(&self, names: &[String]) -> Result<FeatureMatrix, LearnError> {
        let missing: Vec<String> = names
            .iter()
            .filter(|n| self.column_index(n).is_none())
            .cloned()
            .collect();
        let extra: Vec<String> = self.columns.iter().filter(|c| !names.contains(c)).cloned().collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(LearnError::ColumnMismatch { missing, extra });
        }
        self.subset(names)
    }

    /// Keeps the named columns, in the given order, dropping the others.
    pub fn subset(&self, names: &[String]) -> Result<FeatureMatrix, LearnError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_index(n).ok_or_else(|| LearnError::ColumnMismatch {
                    missing: alloc::vec![n.clone()],
                    extra: Vec::new(),
                })
            })
            .collect::<Result<_, _>>()?;
        if idx.iter().enumerate().all(|(k, &j)| k == j) && idx.len() == self.n_cols() {
            return Ok(self.clone());
        }
        let mut values = Vec::with_capacity(self.n_rows * idx.len());
        for i in 0..self.n_rows {
            let row = self.row(i);
            values.extend(idx.iter().map(|&j| row[j]));
        }
        Ok(FeatureMatrix {
            columns: names.to_vec(),
            n_rows: self.n_rows,
            values,
            labels: self.labels.clone(),
        })
    }

    /// Keeps the given rows, in order.
    pub fn rows_subset(&self, rows: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols());
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            columns: self.columns.clone(),
            n_rows: rows.len(),
            values,
            labels: self.labels.as_ref().map(|l| rows.iter().map(|&i| l[i]).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn validation() {
        assert!(matches!(
            FeatureMatrix::new(names(&["a", "b"]), vec![vec![1.0]], None),
            Err(LearnError::NotRectangular { row: 0, .. })
        ));
        assert_eq!(
            FeatureMatrix::new(names(&["a", "a"]), vec![], None).unwrap_err(),
            LearnError::DuplicateColumn("a".into())
        );
        assert_eq!(
            FeatureMatrix::new(names(&["a", "b"]), vec![vec![1.0, 2.0], vec![0.0, f64::NAN]], None).unwrap_err(),
            LearnError::NonFinite {
                row: 1,
                column: "b".into()
            }
        );
    }

    #[test]
    fn select_reorders_and_reports_mismatch() {
        let x = FeatureMatrix::new(names(&["a", "b"]), vec![vec![1.0, 2.0]], None).unwrap();
        let y = x.select(&names(&["b", "a"])).unwrap();
        assert_eq!(y.row(0), &[2.0, 1.0]);
        assert_eq!(
            x.select(&names(&["a", "c"])).unwrap_err(),
            LearnError::ColumnMismatch {
                missing: names(&["c"]),
                extra: names(&["b"])
            }
        );
    }
}

//! Tabular process data: schemas, containers, cleaning, folds, statistics.
//!
//! A [`Dataset`] couples an `n x d` feature matrix with a target vector and a
//! [`Schema`] describing every column's name, unit, and physically plausible
//! bounds. Bounds drive rule-based cleaning (see [`clean`]) and later serve
//! as the box constraints handed to the optimizers.

mod clean;
mod describe;
pub mod io;
mod kfold;
pub mod synthetic;

pub use clean::{clean, CleanReport};
pub use describe::{describe, ColumnStats, DescriptiveStats};
pub use kfold::{kfold_split, FoldAssignment};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Declared name, unit, and closed value range of one column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub unit: String,
    pub lower: f64,
    pub upper: f64,
}

impl FeatureSpec {
    pub fn new(name: &str, unit: &str, lower: f64, upper: f64) -> Self {
        Self {
            name: name.to_string(),
            unit: unit.to_string(),
            lower,
            upper,
        }
    }

    /// True when `value` lies inside the declared closed interval.
    pub fn contains(&self, value: f64) -> bool {
        value >= self.lower && value <= self.upper
    }
}

/// Ordered feature specifications plus the target's specification.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub features: Vec<FeatureSpec>,
    pub target: FeatureSpec,
}

impl Schema {
    pub fn new(features: Vec<FeatureSpec>, target: FeatureSpec) -> Self {
        Self { features, target }
    }

    /// Number of feature columns `d`.
    pub fn width(&self) -> usize {
        self.features.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    /// Index of a feature by exact name.
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }
}

/// In-memory dataset: row-major features, one numeric target per row.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub schema: Schema,
    pub rows: Array2<f64>,
    pub target: Array1<f64>,
}

impl Dataset {
    /// Build a dataset, validating that extents agree with the schema.
    pub fn new(schema: Schema, rows: Array2<f64>, target: Array1<f64>) -> Result<Self> {
        if rows.ncols() != schema.width() {
            return Err(Error::DimensionMismatch {
                context: "dataset columns vs schema".into(),
                expected: schema.width(),
                actual: rows.ncols(),
            });
        }
        if rows.nrows() != target.len() {
            return Err(Error::DimensionMismatch {
                context: "dataset rows vs target length".into(),
                expected: rows.nrows(),
                actual: target.len(),
            });
        }
        Ok(Self {
            schema,
            rows,
            target,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.rows.ncols()
    }

    pub fn target_name(&self) -> &str {
        &self.schema.target.name
    }

    /// New dataset keeping only the given row indices, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        for &i in indices {
            if i >= self.n_rows() {
                return Err(Error::InvalidArgument(format!(
                    "row index {i} out of range for {} rows",
                    self.n_rows()
                )));
            }
        }
        let d = self.n_features();
        let mut rows = Array2::zeros((indices.len(), d));
        let mut target = Array1::zeros(indices.len());
        for (out, &i) in indices.iter().enumerate() {
            rows.row_mut(out).assign(&self.rows.row(i));
            target[out] = self.target[i];
        }
        Dataset::new(self.schema.clone(), rows, target)
    }

    /// New dataset keeping only the given feature columns, in the given order.
    pub fn select_features(&self, indices: &[usize]) -> Result<Self> {
        for &j in indices {
            if j >= self.n_features() {
                return Err(Error::InvalidArgument(format!(
                    "feature index {j} out of range for {} features",
                    self.n_features()
                )));
            }
        }
        let n = self.n_rows();
        let mut rows = Array2::zeros((n, indices.len()));
        for (out, &j) in indices.iter().enumerate() {
            rows.column_mut(out).assign(&self.rows.column(j));
        }
        let features = indices
            .iter()
            .map(|&j| self.schema.features[j].clone())
            .collect();
        Dataset::new(
            Schema::new(features, self.schema.target.clone()),
            rows,
            self.target.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy_schema() -> Schema {
        Schema::new(
            vec![
                FeatureSpec::new("a", "-", 0.0, 10.0),
                FeatureSpec::new("b", "kW", -1.0, 1.0),
            ],
            FeatureSpec::new("y", "t/h", 0.0, 100.0),
        )
    }

    #[test]
    fn new_rejects_mismatched_extents() {
        let schema = toy_schema();
        let err = Dataset::new(schema.clone(), array![[1.0, 2.0, 3.0]], array![1.0]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        let err = Dataset::new(schema, array![[1.0, 2.0]], array![1.0, 2.0]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn select_rows_preserves_order() {
        let data = Dataset::new(
            toy_schema(),
            array![[1.0, 0.1], [2.0, 0.2], [3.0, 0.3]],
            array![10.0, 20.0, 30.0],
        )
        .unwrap();
        let picked = data.select_rows(&[2, 0]).unwrap();
        assert_eq!(picked.rows, array![[3.0, 0.3], [1.0, 0.1]]);
        assert_eq!(picked.target, array![30.0, 10.0]);
    }

    #[test]
    fn select_features_reorders_schema() {
        let data = Dataset::new(
            toy_schema(),
            array![[1.0, 0.1], [2.0, 0.2]],
            array![10.0, 20.0],
        )
        .unwrap();
        let picked = data.select_features(&[1]).unwrap();
        assert_eq!(picked.schema.feature_names(), vec!["b".to_string()]);
        assert_eq!(picked.rows, array![[0.1], [0.2]]);
        assert!(picked.select_features(&[1]).is_err());
    }
}

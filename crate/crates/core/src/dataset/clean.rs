//! Rule-based row cleaning.
//!
//! Three rules are applied per row, in order; the first violated rule both
//! removes the row and claims it in the report:
//!
//! 1. any non-finite feature or target value (NaN from missing cells, ±inf),
//! 2. any feature outside its declared `[lower, upper]` interval,
//! 3. a target outside the target's declared interval.
//!
//! Cleaning is idempotent: a second pass over cleaned data removes nothing.

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Per-rule accounting of removed rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanReport {
    pub rows_in: usize,
    pub rows_kept: usize,
    pub non_finite: usize,
    pub feature_out_of_bounds: usize,
    pub target_out_of_bounds: usize,
}

impl CleanReport {
    pub fn rows_removed(&self) -> usize {
        self.rows_in - self.rows_kept
    }

    /// Human-readable multi-line summary.
    pub fn to_text(&self) -> String {
        format!(
            "cleaning summary\n  rows in:                {}\n  rows kept:              {}\n  removed (non-finite):   {}\n  removed (feature bound): {}\n  removed (target bound):  {}\n",
            self.rows_in,
            self.rows_kept,
            self.non_finite,
            self.feature_out_of_bounds,
            self.target_out_of_bounds
        )
    }

    /// Machine-readable `key=value` lines.
    pub fn to_key_values(&self) -> String {
        format!(
            "rows_in={}\nrows_kept={}\nremoved_non_finite={}\nremoved_feature_out_of_bounds={}\nremoved_target_out_of_bounds={}\n",
            self.rows_in,
            self.rows_kept,
            self.non_finite,
            self.feature_out_of_bounds,
            self.target_out_of_bounds
        )
    }
}

/// Remove rule-violating rows, reporting counts per rule.
pub fn clean(data: &Dataset) -> Result<(Dataset, CleanReport)> {
    let n = data.n_rows();
    let d = data.n_features();
    let mut keep: Vec<usize> = Vec::with_capacity(n);
    let mut report = CleanReport {
        rows_in: n,
        rows_kept: 0,
        non_finite: 0,
        feature_out_of_bounds: 0,
        target_out_of_bounds: 0,
    };

    for i in 0..n {
        let row = data.rows.row(i);
        let y = data.target[i];
        if !y.is_finite() || row.iter().any(|v| !v.is_finite()) {
            report.non_finite += 1;
            continue;
        }
        if (0..d).any(|j| !data.schema.features[j].contains(row[j])) {
            report.feature_out_of_bounds += 1;
            continue;
        }
        if !data.schema.target.contains(y) {
            report.target_out_of_bounds += 1;
            continue;
        }
        keep.push(i);
    }

    if keep.is_empty() {
        return Err(Error::EmptyInput {
            context: "cleaning".into(),
        });
    }
    report.rows_kept = keep.len();
    Ok((data.select_rows(&keep)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureSpec, Schema};
    use ndarray::array;

    fn schema() -> Schema {
        Schema::new(
            vec![FeatureSpec::new("a", "-", 0.0, 10.0)],
            FeatureSpec::new("y", "t/h", 0.0, 100.0),
        )
    }

    #[test]
    fn each_rule_claims_its_row_in_order() {
        // Row 1 violates every rule but is counted as non-finite (rule order).
        let data = Dataset::new(
            schema(),
            array![[f64::NAN], [20.0], [5.0], [1.0]],
            array![500.0, 1.0, -3.0, 50.0],
        )
        .unwrap();
        let (cleaned, report) = clean(&data).unwrap();
        assert_eq!(report.rows_in, 4);
        assert_eq!(report.non_finite, 1);
        assert_eq!(report.feature_out_of_bounds, 1);
        assert_eq!(report.target_out_of_bounds, 1);
        assert_eq!(report.rows_kept, 1);
        assert_eq!(cleaned.rows, array![[1.0]]);
        assert_eq!(cleaned.target, array![50.0]);
    }

    #[test]
    fn boundary_values_are_kept() {
        let data = Dataset::new(
            schema(),
            array![[0.0], [10.0]],
            array![0.0, 100.0],
        )
        .unwrap();
        let (cleaned, report) = clean(&data).unwrap();
        assert_eq!(report.rows_removed(), 0);
        assert_eq!(cleaned.n_rows(), 2);
    }

    #[test]
    fn cleaning_is_idempotent() {
        let data = Dataset::new(
            schema(),
            array![[f64::INFINITY], [3.0], [11.0]],
            array![1.0, 2.0, 3.0],
        )
        .unwrap();
        let (once, first) = clean(&data).unwrap();
        let (twice, second) = clean(&once).unwrap();
        assert_eq!(first.rows_kept, 1);
        assert_eq!(second.rows_removed(), 0);
        assert_eq!(once.rows, twice.rows);
    }

    #[test]
    fn all_rows_removed_is_an_error() {
        let data = Dataset::new(schema(), array![[-1.0]], array![1.0]).unwrap();
        assert!(matches!(
            clean(&data),
            Err(Error::EmptyInput { .. })
        ));
    }

    #[test]
    fn report_serializations_carry_all_counts() {
        let report = CleanReport {
            rows_in: 10,
            rows_kept: 7,
            non_finite: 1,
            feature_out_of_bounds: 2,
            target_out_of_bounds: 0,
        };
        let text = report.to_text();
        assert!(text.contains("rows in:                10"));
        let kv = report.to_key_values();
        assert!(kv.contains("removed_feature_out_of_bounds=2"));
        assert!(kv.contains("rows_kept=7"));
    }
}

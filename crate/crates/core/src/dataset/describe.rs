//! Per-column descriptive statistics with equal-width histograms.

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Summary of one column's observed values.
///
/// Statistics cover finite values only; `non_finite` counts the rest. When a
/// column has no finite values, `min`, `max`, `mean`, and `std` are NaN and
/// the histogram is empty of counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub name: String,
    pub unit: String,
    pub declared_lower: f64,
    pub declared_upper: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator; 0 for a single value).
    pub std: f64,
    pub finite: usize,
    pub non_finite: usize,
    /// Equal-width bin counts spanning `[min, max]`; values equal to `max`
    /// land in the last bin. A constant column fills bin 0.
    pub histogram: Vec<u64>,
}

/// Statistics for every feature column plus the target.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveStats {
    pub features: Vec<ColumnStats>,
    pub target: ColumnStats,
    pub n_rows: usize,
}

/// Compute column statistics with `bins` histogram bins per column.
pub fn describe(data: &Dataset, bins: usize) -> Result<DescriptiveStats> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyInput {
            context: "describe".into(),
        });
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs bins >= 1".into()));
    }
    let features = (0..data.n_features())
        .map(|j| {
            let spec = &data.schema.features[j];
            let column: Vec<f64> = data.rows.column(j).to_vec();
            column_stats(
                &spec.name,
                &spec.unit,
                spec.lower,
                spec.upper,
                &column,
                bins,
            )
        })
        .collect();
    let target = column_stats(
        &data.schema.target.name,
        &data.schema.target.unit,
        data.schema.target.lower,
        data.schema.target.upper,
        data.target.as_slice().expect("contiguous target"),
        bins,
    );
    Ok(DescriptiveStats {
        features,
        target,
        n_rows: data.n_rows(),
    })
}

fn column_stats(
    name: &str,
    unit: &str,
    declared_lower: f64,
    declared_upper: f64,
    values: &[f64],
    bins: usize,
) -> ColumnStats {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let non_finite = values.len() - finite.len();

    let (min, max, mean, std) = if finite.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    } else {
        let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = finite.iter().sum::<f64>() / finite.len() as f64;
        let std = if finite.len() < 2 {
            0.0
        } else {
            let ss: f64 = finite.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (finite.len() - 1) as f64).sqrt()
        };
        (min, max, mean, std)
    };

    let mut histogram = vec![0u64; bins];
    if !finite.is_empty() {
        let width = max - min;
        for &v in &finite {
            let bin = if width == 0.0 {
                0
            } else {
                (((v - min) / width) * bins as f64).min(bins as f64 - 1.0) as usize
            };
            histogram[bin] += 1;
        }
    }

    ColumnStats {
        name: name.to_string(),
        unit: unit.to_string(),
        declared_lower,
        declared_upper,
        min,
        max,
        mean,
        std,
        finite: finite.len(),
        non_finite,
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureSpec, Schema};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn build(values: [f64; 4]) -> Dataset {
        let rows = array![[values[0]], [values[1]], [values[2]], [values[3]]];
        Dataset::new(
            Schema::new(
                vec![FeatureSpec::new("a", "-", -100.0, 100.0)],
                FeatureSpec::new("y", "-", -100.0, 100.0),
            ),
            rows,
            array![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap()
    }

    #[test]
    fn hand_checked_moments() {
        let stats = describe(&build([1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        let col = &stats.features[0];
        assert_eq!(col.min, 1.0);
        assert_eq!(col.max, 4.0);
        assert_abs_diff_eq!(col.mean, 2.5, epsilon = 1e-12);
        // Sample std of 1..4 = sqrt(5/3).
        assert_abs_diff_eq!(col.std, (5.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_eq!(col.histogram, vec![2, 2]);
    }

    #[test]
    fn max_value_lands_in_last_bin() {
        let stats = describe(&build([0.0, 1.0, 9.0, 10.0]), 5).unwrap();
        assert_eq!(stats.features[0].histogram, vec![2, 0, 0, 0, 2]);
    }

    #[test]
    fn constant_column_occupies_single_bin() {
        let stats = describe(&build([7.0, 7.0, 7.0, 7.0]), 4).unwrap();
        let col = &stats.features[0];
        assert_eq!(col.std, 0.0);
        assert_eq!(col.histogram, vec![4, 0, 0, 0]);
    }

    #[test]
    fn non_finite_values_are_counted_not_summed() {
        let stats = describe(&build([1.0, f64::NAN, 3.0, f64::INFINITY]), 2).unwrap();
        let col = &stats.features[0];
        assert_eq!(col.finite, 2);
        assert_eq!(col.non_finite, 2);
        assert_eq!(col.min, 1.0);
        assert_eq!(col.max, 3.0);
    }

    #[test]
    fn zero_bins_rejected() {
        assert!(describe(&build([1.0, 2.0, 3.0, 4.0]), 0).is_err());
    }
}

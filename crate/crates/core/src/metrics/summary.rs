//! Aggregation of per-fold metric reports into order statistics.

use crate::error::{Error, Result};
use crate::metrics::{MetricKind, MetricReport};

/// Order statistics of one metric across folds.
#[derive(Debug, Clone, PartialEq)]
pub struct StatLine {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    /// How many folds had the metric defined.
    pub count: usize,
}

/// Per-metric summaries across a set of folds.
///
/// A metric undefined in some folds is summarized over the defined folds
/// only; a metric defined in no fold has no summary line.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldSummary {
    lines: [Option<StatLine>; 9],
    pub n_folds: usize,
}

impl FoldSummary {
    pub fn get(&self, kind: MetricKind) -> Option<&StatLine> {
        self.lines[kind.index()].as_ref()
    }
}

/// Summarize fold-level reports metric by metric.
pub fn summarize_folds(reports: &[MetricReport]) -> Result<FoldSummary> {
    if reports.is_empty() {
        return Err(Error::EmptyInput {
            context: "summarize_folds".into(),
        });
    }
    let mut lines: [Option<StatLine>; 9] = Default::default();
    for kind in MetricKind::ALL {
        let values: Vec<f64> = reports.iter().filter_map(|r| r.get(kind)).collect();
        lines[kind.index()] = stat_line(&values);
    }
    Ok(FoldSummary {
        lines,
        n_folds: reports.len(),
    })
}

fn stat_line(values: &[f64]) -> Option<StatLine> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
    let min = sorted[0];
    let max = sorted[n - 1];
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let std = if n < 2 {
        0.0
    } else {
        let ss: f64 = sorted.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    };
    Some(StatLine {
        min,
        max,
        mean,
        median,
        std,
        count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::compute_metrics;
    use approx::assert_abs_diff_eq;

    fn report(scale: f64) -> MetricReport {
        compute_metrics(&[scale * 2.0, scale * 4.0], &[scale, scale * 2.0]).unwrap()
    }

    #[test]
    fn single_report_has_zero_spread() {
        let summary = summarize_folds(&[report(1.0)]).unwrap();
        let line = summary.get(MetricKind::Rmse).unwrap();
        assert_eq!(line.std, 0.0);
        assert_eq!(line.min, line.max);
        assert_eq!(line.min, line.median);
        assert_eq!(line.count, 1);
    }

    #[test]
    fn order_statistics_over_three_folds() {
        let summary = summarize_folds(&[report(1.0), report(2.0), report(3.0)]).unwrap();
        let line = summary.get(MetricKind::Mae).unwrap();
        assert_eq!(line.min, 1.5);
        assert_eq!(line.max, 4.5);
        assert_eq!(line.median, 3.0);
        assert_abs_diff_eq!(line.mean, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(line.std, 1.5, epsilon = 1e-12);
        assert!(line.min <= line.median && line.median <= line.max);
    }

    #[test]
    fn undefined_metrics_are_skipped_per_fold() {
        let defined = report(1.0);
        let undefined_r = compute_metrics(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        assert!(undefined_r.pearson_r.is_none());
        let summary = summarize_folds(&[defined, undefined_r]).unwrap();
        assert_eq!(summary.get(MetricKind::PearsonR).unwrap().count, 1);
        assert_eq!(summary.get(MetricKind::Mse).unwrap().count, 2);
        assert_eq!(summary.n_folds, 2);
    }

    #[test]
    fn metric_defined_nowhere_has_no_line() {
        let a = compute_metrics(&[1.0, 2.0], &[3.0, 3.0]).unwrap();
        let b = compute_metrics(&[4.0, 5.0], &[6.0, 6.0]).unwrap();
        let summary = summarize_folds(&[a, b]).unwrap();
        assert!(summary.get(MetricKind::R2).is_none());
        assert!(summary.get(MetricKind::Mse).is_some());
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(summarize_folds(&[]).is_err());
    }
}

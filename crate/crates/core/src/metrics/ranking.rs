//! Rank-based model comparison: Friedman average ranks plus paired t-tests.

use ndarray::Array2;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Outcome of comparing models over paired runs (typically CV folds).
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub model_names: Vec<String>,
    /// Average rank per model; rank 1 is best, ties share averaged ranks.
    pub average_ranks: Vec<f64>,
    /// Friedman chi-square statistic over the rank matrix.
    pub friedman_statistic: f64,
    /// Index of the best (lowest average rank) model; ties pick the first.
    pub best_index: usize,
    /// Two-sided paired t-test p-value of each model against the best.
    /// `None` for the best model itself and for degenerate pairings where
    /// every per-run difference is exactly zero.
    pub pairwise_p: Vec<Option<f64>>,
}

/// Rank models within each run and average the ranks.
///
/// `scores` is runs × models. With `higher_is_better` the largest score in
/// a run takes rank 1. Tied scores share the average of the ranks they
/// span, so each run's ranks always sum to `m (m + 1) / 2`.
///
/// Returns per-model average ranks and the Friedman chi-square statistic
/// `12 n / (m (m + 1)) * Σ_j (R̄_j − (m + 1) / 2)²`.
pub fn friedman_average_ranks(
    scores: &Array2<f64>,
    higher_is_better: bool,
) -> Result<(Vec<f64>, f64)> {
    let n = scores.nrows();
    let m = scores.ncols();
    if n == 0 {
        return Err(Error::EmptyInput {
            context: "friedman_average_ranks".into(),
        });
    }
    if m < 2 {
        return Err(Error::InsufficientData {
            context: "friedman_average_ranks models".into(),
            need: 2,
            got: m,
        });
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "friedman_average_ranks requires finite scores".into(),
        ));
    }

    let mut rank_sums = vec![0.0f64; m];
    for run in scores.rows() {
        // Sort model indices best-first, then assign tie-averaged ranks.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            let (x, y) = (run[a], run[b]);
            if higher_is_better {
                y.partial_cmp(&x).expect("finite")
            } else {
                x.partial_cmp(&y).expect("finite")
            }
            .then(a.cmp(&b))
        });
        let mut pos = 0usize;
        while pos < m {
            let mut end = pos + 1;
            while end < m && run[order[end]] == run[order[pos]] {
                end += 1;
            }
            // Positions pos..end (0-based) share ranks pos+1 ..= end.
            let shared = (pos + 1 + end) as f64 / 2.0;
            for &model in &order[pos..end] {
                rank_sums[model] += shared;
            }
            pos = end;
        }
    }

    let average: Vec<f64> = rank_sums.iter().map(|s| s / n as f64).collect();
    let center = (m + 1) as f64 / 2.0;
    let spread: f64 = average.iter().map(|r| (r - center) * (r - center)).sum();
    let statistic = 12.0 * n as f64 / (m as f64 * (m + 1) as f64) * spread;
    Ok((average, statistic))
}

/// Two-sided paired t-test p-value for equal means of `a` and `b`.
///
/// Errors when every difference is exactly zero (the statistic is
/// undefined); returns `p = 0` when differences are constant but non-zero.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "paired_t_test".into(),
            expected: a.len(),
            actual: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            context: "paired_t_test".into(),
            need: 2,
            got: n,
        });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    if diffs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "paired_t_test requires finite values".into(),
        ));
    }
    if diffs.iter().all(|&d| d == 0.0) {
        return Err(Error::DegenerateDifference { n });
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let ss: f64 = diffs.iter().map(|d| (d - mean) * (d - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    if sd == 0.0 {
        // Constant non-zero difference: infinitely strong evidence.
        return Ok(0.0);
    }
    let t = mean / (sd / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid dof");
    Ok(2.0 * (1.0 - dist.cdf(t.abs())))
}

/// Full comparison: average ranks, Friedman statistic, and per-model
/// p-values against the best-ranked model.
pub fn rank_models(
    model_names: &[String],
    scores: &Array2<f64>,
    higher_is_better: bool,
) -> Result<RankReport> {
    if model_names.len() != scores.ncols() {
        return Err(Error::DimensionMismatch {
            context: "rank_models names vs score columns".into(),
            expected: scores.ncols(),
            actual: model_names.len(),
        });
    }
    let (average_ranks, friedman_statistic) = friedman_average_ranks(scores, higher_is_better)?;
    let best_index = average_ranks
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.partial_cmp(b).expect("finite ranks"))
        .map(|(i, _)| i)
        .expect("at least two models");

    let best_scores: Vec<f64> = scores.column(best_index).to_vec();
    let pairwise_p = (0..scores.ncols())
        .map(|j| {
            if j == best_index {
                return None;
            }
            let model_scores: Vec<f64> = scores.column(j).to_vec();
            match paired_t_test(&model_scores, &best_scores) {
                Ok(p) => Some(p),
                Err(Error::DegenerateDifference { .. }) => None,
                Err(_) => None,
            }
        })
        .collect();

    Ok(RankReport {
        model_names: model_names.to_vec(),
        average_ranks,
        friedman_statistic,
        best_index,
        pairwise_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn hand_example_with_an_all_tied_run() {
        // Higher is better. Run ranks: [1,2,3], [3,2,1], [2,2,2].
        let scores = array![[3.0, 2.0, 1.0], [1.0, 2.0, 3.0], [2.0, 2.0, 2.0]];
        let (ranks, statistic) = friedman_average_ranks(&scores, true).unwrap();
        assert_eq!(ranks, vec![2.0, 2.0, 2.0]);
        assert_abs_diff_eq!(statistic, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn two_way_tie_shares_average_rank() {
        let scores = array![[3.0, 1.0, 1.0, 0.5]];
        let (ranks, _) = friedman_average_ranks(&scores, true).unwrap();
        assert_eq!(ranks, vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn lower_is_better_flips_order() {
        let scores = array![[3.0, 2.0, 1.0]];
        let (ranks, _) = friedman_average_ranks(&scores, false).unwrap();
        assert_eq!(ranks, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn alternating_differences_give_p_of_one() {
        let a = [1.0, 3.0, 1.0, 3.0];
        let b = [2.0, 2.0, 2.0, 2.0];
        assert_abs_diff_eq!(paired_t_test(&a, &b).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn consistent_gap_is_highly_significant() {
        let a = [10.000001, 9.999999, 10.000002, 9.999997, 10.000001];
        let b = [0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(paired_t_test(&a, &b).unwrap() < 1e-3);
    }

    #[test]
    fn identical_series_are_degenerate() {
        let a = [1.0, 2.0, 3.0];
        assert!(matches!(
            paired_t_test(&a, &a),
            Err(Error::DegenerateDifference { n: 3 })
        ));
    }

    #[test]
    fn constant_nonzero_difference_gives_p_zero() {
        let a = [5.0, 6.0, 7.0];
        let b = [4.0, 5.0, 6.0];
        assert_eq!(paired_t_test(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn report_marks_best_and_skips_self_test() {
        let names: Vec<String> = ["m1", "m2", "m3"].iter().map(|s| s.to_string()).collect();
        let scores = array![
            [0.9, 0.5, 0.7],
            [0.8, 0.4, 0.6],
            [0.95, 0.55, 0.75],
            [0.85, 0.45, 0.65]
        ];
        let report = rank_models(&names, &scores, true).unwrap();
        assert_eq!(report.best_index, 0);
        assert_eq!(report.average_ranks, vec![1.0, 3.0, 2.0]);
        assert_eq!(report.pairwise_p[0], None);
        assert!(report.pairwise_p[1].unwrap() < 0.05);
        assert!(report.pairwise_p[2].unwrap() < 0.05);
    }

    proptest! {
        /// Per-run ranks always sum to m(m+1)/2, so averages do as well.
        #[test]
        fn average_ranks_sum_to_invariant(
            rows in 1usize..12,
            cols in 2usize..8,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            // Coarse grid provokes plenty of ties.
            let scores = Array2::from_shape_fn((rows, cols), |_| {
                (rng.gen_range(0..5) as f64) / 2.0
            });
            let (ranks, statistic) = friedman_average_ranks(&scores, true).unwrap();
            let expected = cols as f64 * (cols as f64 + 1.0) / 2.0;
            prop_assert!((ranks.iter().sum::<f64>() - expected).abs() < 1e-9);
            prop_assert!(statistic >= -1e-12);
        }
    }
}

//! Recursive feature elimination driven by permutation importance.
//!
//! Each round trains the supplied regressor on the currently active features,
//! measures every feature's held-out permutation importance, and discards the
//! least important one. The sweep variant additionally cross-validates the
//! model at each intermediate feature-count so the best subset size can be
//! chosen from the elimination path.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::cv::cross_validate_assigned;
use crate::dataset::{kfold_split, Dataset};
use crate::error::{Error, Result};
use crate::metrics::compute_metrics;
use crate::models::{fit, RegressorSpec};
use crate::seeding::{name_tag, rng_from};

/// Tuning knobs for the elimination loop.
#[derive(Debug, Clone)]
pub struct RfeOptions {
    /// Number of independent column shuffles averaged per importance score.
    pub n_permutations: usize,
}

impl Default for RfeOptions {
    fn default() -> Self {
        Self { n_permutations: 5 }
    }
}

/// Outcome of a recursive feature elimination run.
#[derive(Debug, Clone)]
pub struct RfeResult {
    /// Every feature name, strongest first: the retained set ordered by final
    /// importance, followed by the eliminated features in reverse elimination
    /// order (last eliminated first).
    pub ranking: Vec<String>,
    /// The selected subset, listed in schema order.
    pub selected: Vec<String>,
    /// Eliminated features with the 1-based round in which each was dropped.
    pub elimination_rounds: Vec<(String, usize)>,
    /// For sweep runs, feature-count mapped to (mean, median) held-out R^2
    /// across the cross-validation folds. `None` for fixed-target runs.
    pub sweep: Option<BTreeMap<usize, (f64, f64)>>,
}

/// Eliminates features one per round until `target_k` remain.
///
/// Importance is the mean drop in held-out R^2 when one feature column is
/// shuffled on a 20% holdout, averaged over several shuffles. Ties are broken
/// toward dropping the earlier schema column. The same `seed` always yields
/// the same elimination path.
pub fn rfe(data: &Dataset, spec: &RegressorSpec, target_k: usize, seed: u64) -> Result<RfeResult> {
    rfe_with(data, spec, target_k, seed, &RfeOptions::default())
}

/// [`rfe`] with explicit options.
pub fn rfe_with(
    data: &Dataset,
    spec: &RegressorSpec,
    target_k: usize,
    seed: u64,
    options: &RfeOptions,
) -> Result<RfeResult> {
    let d = data.n_features();
    validate_inputs(data, target_k, options)?;

    let mut active: Vec<usize> = (0..d).collect();
    let mut eliminated: Vec<usize> = Vec::new();
    for round in 0..d - target_k {
        let importance = permutation_importance(data, &active, spec, seed, round as u64, options)?;
        let weakest = position_of_min(&importance);
        eliminated.push(active.remove(weakest));
    }

    let final_round = (d - target_k) as u64;
    let final_importance =
        permutation_importance(data, &active, spec, seed, final_round, options)?;
    Ok(assemble_result(
        data,
        &active,
        &final_importance,
        &eliminated,
        None,
    ))
}

/// Runs one elimination pass down to the smallest feature-count in `k_range`,
/// cross-validating the model at every count in the range along the way.
///
/// `selected` is the subset at the count with the highest mean R^2 (ties go
/// to the smaller count), and `sweep` holds the full score curve. Because
/// each round's holdout and shuffles are seeded by round index alone, the
/// path visited here is identical to what [`rfe`] would produce for any
/// target inside the range.
pub fn rfe_sweep(
    data: &Dataset,
    spec: &RegressorSpec,
    k_range: std::ops::RangeInclusive<usize>,
    folds: usize,
    seed: u64,
) -> Result<RfeResult> {
    let d = data.n_features();
    let (min_k, max_k) = (*k_range.start(), *k_range.end());
    if min_k < 1 || max_k > d || min_k > max_k {
        return Err(Error::InvalidArgument(format!(
            "feature-count range {min_k}..={max_k} must lie within 1..={d}"
        )));
    }
    let options = RfeOptions::default();
    validate_inputs(data, min_k, &options)?;

    let assignment = kfold_split(
        data.n_rows(),
        folds,
        crate::seeding::derive_seed(seed, &[name_tag("rfe_sweep_folds")]),
    )?;

    let mut active: Vec<usize> = (0..d).collect();
    let mut eliminated: Vec<usize> = Vec::new();
    let mut snapshots: Vec<(usize, Vec<usize>)> = Vec::new();
    if active.len() <= max_k {
        snapshots.push((active.len(), active.clone()));
    }
    for round in 0..d - min_k {
        let importance =
            permutation_importance(data, &active, spec, seed, round as u64, &options)?;
        let weakest = position_of_min(&importance);
        eliminated.push(active.remove(weakest));
        if (min_k..=max_k).contains(&active.len()) {
            snapshots.push((active.len(), active.clone()));
        }
    }

    let mut sweep = BTreeMap::new();
    let mut scored: Vec<(usize, Vec<usize>, f64)> = Vec::new();
    for (count, subset) in snapshots {
        let reduced = data.select_features(&subset)?;
        let outcome = cross_validate_assigned(spec, &reduced, &assignment)?;
        let mut fold_r2 = Vec::with_capacity(outcome.fold_reports.len());
        for (fold, report) in outcome.fold_reports.iter().enumerate() {
            let r2 = report.r2.ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "R^2 undefined on fold {fold} while sweeping {count} features"
                ))
            })?;
            fold_r2.push(r2);
        }
        let mean = fold_r2.iter().sum::<f64>() / fold_r2.len() as f64;
        let median = median_of(&mut fold_r2);
        sweep.insert(count, (mean, median));
        scored.push((count, subset, mean));
    }

    // Smallest count wins ties, so scan ascending with a strict improvement.
    scored.sort_by_key(|(count, _, _)| *count);
    let mut best = 0;
    for i in 1..scored.len() {
        if scored[i].2 > scored[best].2 {
            best = i;
        }
    }
    let selected_subset = scored[best].1.clone();

    let final_round = (d - min_k) as u64;
    let final_importance =
        permutation_importance(data, &active, spec, seed, final_round, &options)?;
    let mut result = assemble_result(data, &active, &final_importance, &eliminated, Some(sweep));
    result.selected = selected_subset
        .iter()
        .map(|&j| data.schema.features[j].name.clone())
        .collect();
    Ok(result)
}

fn validate_inputs(data: &Dataset, target_k: usize, options: &RfeOptions) -> Result<()> {
    let d = data.n_features();
    if target_k < 1 || target_k > d {
        return Err(Error::InvalidArgument(format!(
            "target feature count {target_k} must lie within 1..={d}"
        )));
    }
    if options.n_permutations < 1 {
        return Err(Error::InvalidArgument(
            "importance needs at least one permutation".into(),
        ));
    }
    if data.n_rows() < 5 {
        return Err(Error::InsufficientData {
            context: "feature-elimination holdout".into(),
            need: 5,
            got: data.n_rows(),
        });
    }
    Ok(())
}

/// Mean held-out R^2 drop per active feature, aligned with `active`.
///
/// The holdout split is seeded by `(seed, round)` and each feature's shuffles
/// by `(seed, round, feature, shuffle)`, making every score reproducible and
/// independent of evaluation order.
fn permutation_importance(
    data: &Dataset,
    active: &[usize],
    spec: &RegressorSpec,
    seed: u64,
    round: u64,
    options: &RfeOptions,
) -> Result<Vec<f64>> {
    let subset = data.select_features(active)?;
    let n = subset.n_rows();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(seed, &[name_tag("rfe_split"), round]));
    let n_test = (n / 5).max(1);
    let mut test: Vec<usize> = order[..n_test].to_vec();
    let mut train: Vec<usize> = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();

    let train_data = subset.select_rows(&train)?;
    let test_data = subset.select_rows(&test)?;
    let model = fit(spec, &train_data)?;

    let actual = test_data.target.to_vec();
    let baseline_pred = model.predict_rows(&test_data.rows.view())?;
    let baseline = compute_metrics(&baseline_pred, &actual)?.r2.ok_or_else(|| {
        Error::InvalidArgument("held-out targets are constant; importance is undefined".into())
    })?;

    (0..active.len())
        .into_par_iter()
        .map(|j| {
            let mut drops = 0.0;
            for p in 0..options.n_permutations {
                let mut rng = rng_from(
                    seed,
                    &[name_tag("rfe_perm"), round, active[j] as u64, p as u64],
                );
                let mut shuffled: Array2<f64> = test_data.rows.clone();
                let mut column: Vec<f64> = shuffled.column(j).to_vec();
                column.shuffle(&mut rng);
                for (i, v) in column.into_iter().enumerate() {
                    shuffled[[i, j]] = v;
                }
                let pred = model.predict_rows(&shuffled.view())?;
                let permuted = compute_metrics(&pred, &actual)?
                    .r2
                    .expect("same actuals as baseline");
                drops += baseline - permuted;
            }
            Ok(drops / options.n_permutations as f64)
        })
        .collect()
}

/// First index holding the minimum value, so earlier schema columns win ties.
fn position_of_min(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

fn assemble_result(
    data: &Dataset,
    active: &[usize],
    final_importance: &[f64],
    eliminated: &[usize],
    sweep: Option<BTreeMap<usize, (f64, f64)>>,
) -> RfeResult {
    let name = |j: usize| data.schema.features[j].name.clone();

    let mut retained: Vec<(usize, f64)> = active
        .iter()
        .zip(final_importance)
        .map(|(&j, &imp)| (j, imp))
        .collect();
    retained.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut ranking: Vec<String> = retained.iter().map(|&(j, _)| name(j)).collect();
    ranking.extend(eliminated.iter().rev().map(|&j| name(j)));

    RfeResult {
        ranking,
        selected: active.iter().map(|&j| name(j)).collect(),
        elimination_rounds: eliminated
            .iter()
            .enumerate()
            .map(|(round, &j)| (name(j), round + 1))
            .collect(),
        sweep,
    }
}

fn median_of(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureSpec, Schema};
    use ndarray::Array1;
    use rand::Rng;

    /// Three informative columns, three pure-noise columns.
    fn linear_dataset(n: usize, seed: u64) -> Dataset {
        let mut rng = rng_from(seed, &[name_tag("rfe_test")]);
        let features: Vec<FeatureSpec> = (0..6)
            .map(|j| FeatureSpec::new(&format!("x{j}"), "", -5.0, 5.0))
            .collect();
        let schema = Schema::new(features, FeatureSpec::new("y", "", -1e9, 1e9));
        let mut rows = Array2::zeros((n, 6));
        let mut target = Array1::zeros(n);
        for i in 0..n {
            for j in 0..6 {
                rows[[i, j]] = rng.gen_range(-5.0..5.0);
            }
            target[i] = 3.0 * rows[[i, 0]] - 2.0 * rows[[i, 1]] + rows[[i, 2]]
                + 0.05 * rng.gen::<f64>();
        }
        Dataset::new(schema, rows, target).unwrap()
    }

    #[test]
    fn elimination_keeps_the_informative_features() {
        let data = linear_dataset(200, 3);
        let spec = RegressorSpec::new("ols").unwrap();
        let result = rfe(&data, &spec, 3, 7).unwrap();
        let mut selected = result.selected.clone();
        selected.sort();
        assert_eq!(selected, vec!["x0", "x1", "x2"]);
        assert_eq!(result.elimination_rounds.len(), 3);
        assert!(result.sweep.is_none());
    }

    #[test]
    fn ranking_is_a_permutation_with_strongest_first() {
        let data = linear_dataset(200, 4);
        let spec = RegressorSpec::new("ols").unwrap();
        let result = rfe(&data, &spec, 3, 9).unwrap();
        let mut names = result.ranking.clone();
        names.sort();
        assert_eq!(names, vec!["x0", "x1", "x2", "x3", "x4", "x5"]);
        // x0 has the largest coefficient, so it should lead the ranking.
        assert_eq!(result.ranking[0], "x0");
    }

    #[test]
    fn same_seed_reproduces_the_path() {
        let data = linear_dataset(120, 5);
        let spec = RegressorSpec::new("ols").unwrap();
        let a = rfe(&data, &spec, 2, 11).unwrap();
        let b = rfe(&data, &spec, 2, 11).unwrap();
        assert_eq!(a.ranking, b.ranking);
        assert_eq!(a.elimination_rounds, b.elimination_rounds);
    }

    #[test]
    fn sweep_scores_every_count_and_matches_the_fixed_path() {
        let data = linear_dataset(200, 6);
        let spec = RegressorSpec::new("ols").unwrap();
        let sweep = rfe_sweep(&data, &spec, 2..=6, 5, 13).unwrap();
        let curve = sweep.sweep.as_ref().unwrap();
        assert_eq!(curve.keys().copied().collect::<Vec<_>>(), vec![2, 3, 4, 5, 6]);
        // Dropping a signal feature at K=2 must hurt; the best count keeps
        // all three informative columns.
        let best_k = sweep.selected.len();
        assert!(best_k >= 3, "chose {best_k} features");
        let fixed = rfe(&data, &spec, best_k, 13).unwrap();
        assert_eq!(sweep.selected, fixed.selected);
    }

    #[test]
    fn invalid_targets_are_rejected() {
        let data = linear_dataset(50, 8);
        let spec = RegressorSpec::new("ols").unwrap();
        assert!(rfe(&data, &spec, 0, 1).is_err());
        assert!(rfe(&data, &spec, 7, 1).is_err());
        assert!(rfe_sweep(&data, &spec, 3..=9, 5, 1).is_err());
    }
}

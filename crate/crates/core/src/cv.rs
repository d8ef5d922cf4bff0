//! K-fold cross-validation over regressor specs.

use ndarray::Array2;
use rayon::prelude::*;

use crate::dataset::{kfold_split, Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, summarize_folds, FoldSummary, MetricKind, MetricReport};
use crate::models::{fit, RegressorSpec};

/// Per-fold metric reports for one spec, with their summary.
#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub spec: RegressorSpec,
    pub fold_reports: Vec<MetricReport>,
    pub summary: FoldSummary,
}

/// K-fold cross-validation of one spec.
///
/// `seed` controls only the fold shuffle; model randomness stays pinned to
/// the spec's own seed. Every fold needs at least two test rows, so `k`
/// may not exceed `n / 2`. Folds are evaluated in parallel but collected
/// in fold order, so results do not depend on the worker count.
pub fn cross_validate(spec: &RegressorSpec, data: &Dataset, k: usize, seed: u64) -> Result<CvOutcome> {
    let folds = kfold_split(data.n_rows(), k, seed)?;
    cross_validate_assigned(spec, data, &folds)
}

/// Cross-validate against a pre-computed fold assignment, so several specs
/// can share identical folds.
pub fn cross_validate_assigned(
    spec: &RegressorSpec,
    data: &Dataset,
    folds: &FoldAssignment,
) -> Result<CvOutcome> {
    if data.n_rows() < 2 * folds.k {
        return Err(Error::InvalidFoldCount {
            k: folds.k,
            n: data.n_rows(),
        });
    }
    let fold_reports: Vec<MetricReport> = (0..folds.k)
        .into_par_iter()
        .map(|f| {
            let train = data.select_rows(&folds.train_indices(f))?;
            let test_idx = folds.test_indices(f);
            let test = data.select_rows(&test_idx)?;
            let model = fit(spec, &train)?;
            let preds = model.predict_dataset(&test)?;
            compute_metrics(&preds, test.target.as_slice().expect("contiguous targets"))
        })
        .collect::<Result<_>>()?;
    let summary = summarize_folds(&fold_reports)?;
    Ok(CvOutcome {
        spec: spec.clone(),
        fold_reports,
        summary,
    })
}

/// Cross-validate several specs over one shared fold assignment.
pub fn compare_models(
    specs: &[RegressorSpec],
    data: &Dataset,
    k: usize,
    seed: u64,
) -> Result<Vec<CvOutcome>> {
    let folds = kfold_split(data.n_rows(), k, seed)?;
    specs
        .iter()
        .map(|spec| cross_validate_assigned(spec, data, &folds))
        .collect()
}

/// Fold-by-model matrix of one metric, shaped for rank analysis.
///
/// Fails if the metric is undefined on any fold, naming the offender:
/// rank comparisons need a complete matrix.
pub fn score_matrix(outcomes: &[CvOutcome], kind: MetricKind) -> Result<Array2<f64>> {
    if outcomes.is_empty() {
        return Err(Error::EmptyInput {
            context: "score matrix".to_string(),
        });
    }
    let n_folds = outcomes[0].fold_reports.len();
    let mut matrix = Array2::zeros((n_folds, outcomes.len()));
    for (m, outcome) in outcomes.iter().enumerate() {
        if outcome.fold_reports.len() != n_folds {
            return Err(Error::DimensionMismatch {
                context: "score matrix folds".to_string(),
                expected: n_folds,
                actual: outcome.fold_reports.len(),
            });
        }
        for (f, report) in outcome.fold_reports.iter().enumerate() {
            matrix[[f, m]] = report.get(kind).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "{} is undefined for model `{}` on fold {f}",
                    kind.label(),
                    outcome.spec.family().name()
                ))
            })?;
        }
    }
    Ok(matrix)
}

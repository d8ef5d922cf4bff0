//! Boosting by reweighted resampling with a weighted-median combiner
//! (the R2 variant for regression, linear loss).

use rand::Rng;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::seeding::{name_tag, rng_from};

use super::tree::{grow_exact, ColMajor, GainKind, GrowParams, SortedColumns, Tree};
use super::ModelKind;

/// Stage weight when a base tree reproduces the targets exactly: the loss
/// ratio is treated as this floor instead of zero.
const EXACT_FIT_FLOOR: f64 = 1e-12;

pub(super) fn fit(
    data: &Dataset,
    n_stages: usize,
    base_depth: usize,
    min_samples_leaf: usize,
    seed: u64,
) -> Result<(ModelKind, Vec<String>)> {
    let n = data.n_rows();
    let x = ColMajor::from_rows(&data.rows.view());
    let targets = data.target.to_vec();
    let grow = GrowParams {
        max_depth: base_depth,
        min_samples_leaf,
        feature_subset: None,
    };

    let mut weights = vec![1.0 / n as f64; n];
    let mut trees: Vec<Tree> = Vec::new();
    let mut log_weights: Vec<f64> = Vec::new();
    let mut warnings = Vec::new();

    for stage in 0..n_stages {
        let mut rng = rng_from(seed, &[name_tag("adaboost_r2"), stage as u64]);

        // Weighted bootstrap by inverse CDF over the current weights.
        let mut cumulative = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        let total = acc;
        let ids: Vec<u32> = (0..n)
            .map(|_| {
                let u = rng.gen::<f64>() * total;
                cumulative.partition_point(|&c| c <= u).min(n - 1) as u32
            })
            .collect();

        let sorted = SortedColumns::build(&x, &ids);
        let tree = grow_exact(
            &x,
            &sorted,
            &GainKind::Variance { targets: &targets },
            &grow,
            None,
        )
        .tree;

        let errors: Vec<f64> = (0..n)
            .map(|i| {
                let row: Vec<f64> = (0..x.n_features()).map(|j| x.value(j, i as u32)).collect();
                (tree.predict_row(&row) - targets[i]).abs()
            })
            .collect();
        let max_error = errors.iter().cloned().fold(0.0f64, f64::max);

        if max_error == 0.0 {
            trees.push(tree);
            log_weights.push((1.0 / EXACT_FIT_FLOOR).ln());
            break;
        }

        let losses: Vec<f64> = errors.iter().map(|e| e / max_error).collect();
        let avg_loss: f64 = weights.iter().zip(&losses).map(|(w, l)| w * l).sum();

        if avg_loss >= 0.5 {
            if trees.is_empty() {
                warnings.push(format!(
                    "first base tree already has average loss {avg_loss:.3} >= 0.5; \
                     keeping it alone"
                ));
                trees.push(tree);
                log_weights.push(1.0);
            }
            break;
        }

        let beta = avg_loss / (1.0 - avg_loss);
        log_weights.push((1.0 / beta).ln());
        trees.push(tree);

        for (w, l) in weights.iter_mut().zip(&losses) {
            *w *= beta.powf(1.0 - l);
        }
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
    }

    Ok((ModelKind::Adaboost { trees, log_weights }, warnings))
}

/// Weighted median of the stage predictions: sort by predicted value (ties
/// by stage index) and return the first prediction whose cumulative weight
/// reaches half the total.
pub(super) fn weighted_median(trees: &[Tree], log_weights: &[f64], row: &[f64]) -> f64 {
    let mut staged: Vec<(f64, usize)> = trees
        .iter()
        .enumerate()
        .map(|(i, t)| (t.predict_row(row), i))
        .collect();
    staged.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite predictions")
            .then(a.1.cmp(&b.1))
    });
    let total: f64 = log_weights.iter().sum();
    let mut acc = 0.0;
    for &(pred, i) in &staged {
        acc += log_weights[i];
        if acc >= total / 2.0 {
            return pred;
        }
    }
    staged.last().map(|&(p, _)| p).unwrap_or(0.0)
}

//! Linear regressors: ordinary least squares, coordinate-descent lasso and
//! elastic net, and stochastic gradient descent.
//!
//! All three train on standardized features (and, for the penalized
//! models, a centered target) and map the solution back to raw feature
//! scale, so fitted weights apply directly to unscaled rows.

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seeding::{name_tag, rng_from};

use super::standardize::Standardizer;
use super::ModelKind;

type FitOutput = (ModelKind, Vec<String>);

/// Least squares via singular-value decomposition.
///
/// Singular values below `1e-12` of the largest are treated as zero, which
/// yields the minimum-norm solution on rank-deficient designs: duplicated
/// columns share their weight equally instead of failing.
pub(super) fn fit_ols(data: &Dataset) -> Result<FitOutput> {
    let n = data.n_rows();
    let d = data.n_features();
    let std = Standardizer::fit(&data.rows.view());

    let design = DMatrix::from_fn(n, d + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            std.apply(j - 1, data.rows[[i, j - 1]])
        }
    });
    let y = DVector::from_fn(n, |i, _| data.target[i]);

    let svd = design.svd(true, true);
    let largest = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let solution = svd
        .solve(&y, largest * 1e-12)
        .map_err(|e| Error::InvalidArgument(format!("least-squares solve failed: {e}")))?;

    let w_std: Vec<f64> = (0..d).map(|j| solution[j + 1]).collect();
    let (weights, intercept) = to_raw_scale(&w_std, solution[0], &std);
    Ok((ModelKind::Linear { weights, intercept }, Vec::new()))
}

/// Cyclic coordinate descent for the objective
/// `0.5 * sum(residual^2) + lambda1 * sum|w| + lambda2 * sum(w^2)`
/// on standardized features with a centered target.
///
/// `lambda2 = 0` gives the lasso; both penalties zero recovers least
/// squares. Stops when the largest weight change in a sweep drops to
/// `tol`; exceeding `max_cycles` keeps the current solution and records a
/// warning on the model.
pub(super) fn fit_coordinate_descent(
    data: &Dataset,
    lambda1: f64,
    lambda2: f64,
    tol: f64,
    max_cycles: usize,
) -> Result<FitOutput> {
    let n = data.n_rows();
    let d = data.n_features();
    let std = Standardizer::fit(&data.rows.view());

    let columns: Vec<Vec<f64>> = (0..d)
        .map(|j| (0..n).map(|i| std.apply(j, data.rows[[i, j]])).collect())
        .collect();
    let col_sq: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|z| z * z).sum())
        .collect();
    let y_mean = data.target.sum() / n as f64;
    let mut residual: Vec<f64> = data.target.iter().map(|y| y - y_mean).collect();
    let mut w = vec![0.0f64; d];

    let mut warnings = Vec::new();
    let mut converged = false;
    for _ in 0..max_cycles {
        let mut max_step = 0.0f64;
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let fit_j: f64 = columns[j]
                .iter()
                .zip(&residual)
                .map(|(z, r)| z * r)
                .sum::<f64>()
                + w[j] * col_sq[j];
            let w_new = soft(fit_j, lambda1) / (col_sq[j] + 2.0 * lambda2);
            let step = w_new - w[j];
            if step != 0.0 {
                for (r, z) in residual.iter_mut().zip(&columns[j]) {
                    *r -= step * z;
                }
                w[j] = w_new;
            }
            max_step = max_step.max(step.abs());
        }
        if max_step <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "coordinate descent stopped after {max_cycles} sweeps without reaching tol={tol}"
        ));
    }

    let (weights, intercept) = to_raw_scale(&w, y_mean, &std);
    Ok((ModelKind::Linear { weights, intercept }, warnings))
}

/// Per-sample gradient descent on standardized features.
///
/// Rows are visited in a freshly shuffled order each epoch; the shuffle
/// stream derives from the spec seed, so refits are identical.
pub(super) fn fit_sgd(
    data: &Dataset,
    learning_rate: f64,
    epochs: usize,
    seed: u64,
) -> Result<FitOutput> {
    let n = data.n_rows();
    let d = data.n_features();
    let std = Standardizer::fit(&data.rows.view());
    let z = std.transform(&data.rows.view());

    let mut rng = rng_from(seed, &[name_tag("sgd")]);
    let mut order: Vec<usize> = (0..n).collect();
    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;

    for _ in 0..epochs {
        rand::seq::SliceRandom::shuffle(&mut order[..], &mut rng);
        for &i in &order {
            let row = &z[i * d..(i + 1) * d];
            let pred = b + w.iter().zip(row).map(|(wj, zj)| wj * zj).sum::<f64>();
            let err = data.target[i] - pred;
            b += learning_rate * err;
            for (wj, zj) in w.iter_mut().zip(row) {
                *wj += learning_rate * err * zj;
            }
        }
    }

    if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidHyperparameter {
            family: "sgd".to_string(),
            message: format!("training diverged with learning_rate={learning_rate}"),
        });
    }

    let (weights, intercept) = to_raw_scale(&w, b, &std);
    Ok((ModelKind::Linear { weights, intercept }, Vec::new()))
}

fn soft(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// Convert standardized-scale weights and intercept to raw feature scale.
fn to_raw_scale(w_std: &[f64], b_std: f64, std: &Standardizer) -> (Vec<f64>, f64) {
    let weights: Vec<f64> = w_std
        .iter()
        .zip(&std.scales)
        .map(|(w, s)| w / s)
        .collect();
    let intercept = b_std
        - weights
            .iter()
            .zip(&std.means)
            .map(|(w, m)| w * m)
            .sum::<f64>();
    (weights, intercept)
}

//! Regression quality metrics, fold summaries, and rank-based comparison.
//!
//! [`compute_metrics`] evaluates nine measures in one pass. Measures that
//! can be undefined on degenerate input (relative errors with zero actuals,
//! correlation with zero variance, log-scale error with values at or below
//! −1) are represented as `Option<f64>` rather than NaN, so downstream
//! serialization can print an explicit `NA`.

mod ranking;
mod summary;
pub mod table;

pub use ranking::{friedman_average_ranks, paired_t_test, rank_models, RankReport};
pub use summary::{summarize_folds, FoldSummary, StatLine};

use crate::error::{Error, Result};

/// One evaluation of predictions against actual values.
///
/// `mape` and `smape` are percentages (a perfect 10%-off prediction scores
/// 10.0, not 0.1). `smape` uses the symmetric denominator
/// `(|pred| + |actual|) / 2`, so it is always defined and bounded by 200;
/// a pair with `pred = actual = 0` contributes zero to its mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    /// Mean absolute percentage error; undefined when any actual is zero
    /// and no epsilon guard was requested.
    pub mape: Option<f64>,
    pub smape: f64,
    /// Pearson correlation; undefined when either side has zero variance.
    pub pearson_r: Option<f64>,
    /// Coefficient of determination `1 - SS_res / SS_tot`; undefined when
    /// the actuals are constant.
    pub r2: Option<f64>,
    /// Explained variance score; undefined when the actuals are constant.
    pub evs: Option<f64>,
    /// Mean squared log error over `ln(1 + v)`; undefined when any value on
    /// either side is at or below −1.
    pub msle: Option<f64>,
}

/// Identifier for one of the nine measures, in canonical storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Mse,
    Rmse,
    Mae,
    Mape,
    Smape,
    PearsonR,
    R2,
    Evs,
    Msle,
}

impl MetricKind {
    pub const ALL: [MetricKind; 9] = [
        MetricKind::Mse,
        MetricKind::Rmse,
        MetricKind::Mae,
        MetricKind::Mape,
        MetricKind::Smape,
        MetricKind::PearsonR,
        MetricKind::R2,
        MetricKind::Evs,
        MetricKind::Msle,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Mse => "MSE",
            MetricKind::Rmse => "RMSE",
            MetricKind::Mae => "MAE",
            MetricKind::Mape => "MAPE",
            MetricKind::Smape => "SMAPE",
            MetricKind::PearsonR => "R",
            MetricKind::R2 => "R2",
            MetricKind::Evs => "EVS",
            MetricKind::Msle => "MSLE",
        }
    }

    /// Position in [`MetricKind::ALL`].
    pub fn index(self) -> usize {
        MetricKind::ALL
            .iter()
            .position(|&k| k == self)
            .expect("member of ALL")
    }
}

impl MetricReport {
    /// Value of one measure; `None` marks an undefined value.
    pub fn get(&self, kind: MetricKind) -> Option<f64> {
        match kind {
            MetricKind::Mse => Some(self.mse),
            MetricKind::Rmse => Some(self.rmse),
            MetricKind::Mae => Some(self.mae),
            MetricKind::Mape => self.mape,
            MetricKind::Smape => Some(self.smape),
            MetricKind::PearsonR => self.pearson_r,
            MetricKind::R2 => self.r2,
            MetricKind::Evs => self.evs,
            MetricKind::Msle => self.msle,
        }
    }
}

/// Optional guards applied while computing metrics.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricOptions {
    /// When set, MAPE divides by `max(|actual|, epsilon)` instead of being
    /// undefined at zero actuals.
    pub mape_epsilon: Option<f64>,
}

/// Evaluate all nine measures with default options.
pub fn compute_metrics(pred: &[f64], actual: &[f64]) -> Result<MetricReport> {
    compute_metrics_with(pred, actual, MetricOptions::default())
}

/// Evaluate all nine measures.
///
/// Inputs must be equal-length (≥ 2) slices of finite values.
pub fn compute_metrics_with(
    pred: &[f64],
    actual: &[f64],
    options: MetricOptions,
) -> Result<MetricReport> {
    if pred.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            context: "compute_metrics predictions vs actuals".into(),
            expected: actual.len(),
            actual: pred.len(),
        });
    }
    if pred.len() < 2 {
        return Err(Error::InsufficientData {
            context: "compute_metrics".into(),
            need: 2,
            got: pred.len(),
        });
    }
    if pred.iter().chain(actual.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "compute_metrics requires finite values".into(),
        ));
    }
    let n = pred.len() as f64;

    let mut sq_sum = 0.0;
    let mut abs_sum = 0.0;
    for (&p, &a) in pred.iter().zip(actual) {
        let e = p - a;
        sq_sum += e * e;
        abs_sum += e.abs();
    }
    let mse = sq_sum / n;
    let rmse = mse.sqrt();
    let mae = abs_sum / n;

    let mape = if actual.contains(&0.0) && options.mape_epsilon.is_none() {
        None
    } else {
        let eps = options.mape_epsilon.unwrap_or(0.0);
        let sum: f64 = pred
            .iter()
            .zip(actual)
            .map(|(&p, &a)| (p - a).abs() / a.abs().max(eps))
            .sum();
        Some(100.0 * sum / n)
    };

    let smape_sum: f64 = pred
        .iter()
        .zip(actual)
        .map(|(&p, &a)| {
            let denom = (p.abs() + a.abs()) / 2.0;
            if denom == 0.0 {
                0.0
            } else {
                (p - a).abs() / denom
            }
        })
        .sum();
    let smape = 100.0 * smape_sum / n;

    let mean_p = pred.iter().sum::<f64>() / n;
    let mean_a = actual.iter().sum::<f64>() / n;
    let mut ss_p = 0.0;
    let mut ss_a = 0.0;
    let mut cross = 0.0;
    for (&p, &a) in pred.iter().zip(actual) {
        ss_p += (p - mean_p) * (p - mean_p);
        ss_a += (a - mean_a) * (a - mean_a);
        cross += (p - mean_p) * (a - mean_a);
    }
    let pearson_r = if ss_p == 0.0 || ss_a == 0.0 {
        None
    } else {
        Some(cross / (ss_p.sqrt() * ss_a.sqrt()))
    };

    let r2 = if ss_a == 0.0 { None } else { Some(1.0 - sq_sum / ss_a) };

    let evs = if ss_a == 0.0 {
        None
    } else {
        let mean_err = pred
            .iter()
            .zip(actual)
            .map(|(&p, &a)| p - a)
            .sum::<f64>()
            / n;
        let var_err = pred
            .iter()
            .zip(actual)
            .map(|(&p, &a)| {
                let c = (p - a) - mean_err;
                c * c
            })
            .sum::<f64>()
            / n;
        Some(1.0 - var_err / (ss_a / n))
    };

    let msle = if pred.iter().chain(actual.iter()).any(|&v| v <= -1.0) {
        None
    } else {
        let sum: f64 = pred
            .iter()
            .zip(actual)
            .map(|(&p, &a)| {
                let d = (1.0 + p).ln() - (1.0 + a).ln();
                d * d
            })
            .sum();
        Some(sum / n)
    };

    Ok(MetricReport {
        mse,
        rmse,
        mae,
        mape,
        smape,
        pearson_r,
        r2,
        evs,
        msle,
    })
}

//! CSV artifact writers.
//!
//! Every writer is byte-deterministic for a given input: floats are printed
//! with the shortest representation that round-trips, rows follow the input
//! order, and undefined values become empty cells.

use std::path::Path;

use anyhow::{Context, Result};
use ndarray::Array2;

use millopt_core::dataset::{CleanReport, DescriptiveStats};
use millopt_core::metrics::table::TABLE_COLUMNS;
use millopt_core::metrics::{FoldSummary, RankReport};
use millopt_core::preprocess::{LofResult, RfeResult};

fn open(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn num(value: f64) -> String {
    format!("{value}")
}

fn cell(value: Option<f64>) -> String {
    value.map(num).unwrap_or_default()
}

/// One row per column: declared schema bounds next to observed statistics.
pub fn write_stats_csv(stats: &DescriptiveStats, path: &Path) -> Result<()> {
    let mut writer = open(path)?;
    writer.write_record([
        "column",
        "unit",
        "declared_lower",
        "declared_upper",
        "min",
        "max",
        "mean",
        "std",
        "finite",
        "non_finite",
    ])?;
    for column in stats.features.iter().chain(std::iter::once(&stats.target)) {
        writer.write_record([
            column.name.as_str(),
            column.unit.as_str(),
            &num(column.declared_lower),
            &num(column.declared_upper),
            &num(column.min),
            &num(column.max),
            &num(column.mean),
            &num(column.std),
            &column.finite.to_string(),
            &column.non_finite.to_string(),
        ])?;
    }
    writer.flush().context("writing stats")?;
    Ok(())
}

pub fn write_clean_report_csv(report: &CleanReport, path: &Path) -> Result<()> {
    let mut writer = open(path)?;
    writer.write_record(["measure", "value"])?;
    for (measure, value) in [
        ("rows_in", report.rows_in),
        ("rows_kept", report.rows_kept),
        ("removed_non_finite", report.non_finite),
        ("removed_feature_out_of_bounds", report.feature_out_of_bounds),
        ("removed_target_out_of_bounds", report.target_out_of_bounds),
    ] {
        writer.write_record([measure, &value.to_string()])?;
    }
    writer.flush().context("writing clean report")?;
    Ok(())
}

/// Fold summary in the comparison-table layout: statistic rows over metric
/// columns. Metrics undefined in every fold leave empty cells.
pub fn write_fold_summary_csv(summary: &FoldSummary, path: &Path) -> Result<()> {
    let mut writer = open(path)?;
    let mut header = vec!["statistic".to_string()];
    header.extend(TABLE_COLUMNS.iter().map(|kind| kind.label().to_string()));
    writer.write_record(&header)?;

    type Getter = fn(&millopt_core::metrics::StatLine) -> f64;
    let rows: [(&str, Getter); 5] = [
        ("min", |s| s.min),
        ("max", |s| s.max),
        ("mean", |s| s.mean),
        ("median", |s| s.median),
        ("std", |s| s.std),
    ];
    for (label, getter) in rows {
        let mut record = vec![label.to_string()];
        for kind in TABLE_COLUMNS {
            record.push(cell(summary.get(kind).map(getter)));
        }
        writer.write_record(&record)?;
    }
    let mut counts = vec!["folds_defined".to_string()];
    for kind in TABLE_COLUMNS {
        counts.push(
            summary
                .get(kind)
                .map(|s| s.count.to_string())
                .unwrap_or_default(),
        );
    }
    writer.write_record(&counts)?;
    writer.flush().context("writing fold summary")?;
    Ok(())
}

/// Per-fold score matrix: one row per fold, one column per model.
pub fn write_cv_scores_csv(names: &[String], scores: &Array2<f64>, path: &Path) -> Result<()> {
    let mut writer = open(path)?;
    let mut header = vec!["fold".to_string()];
    header.extend(names.iter().cloned());
    writer.write_record(&header)?;
    for fold in 0..scores.nrows() {
        let mut record = vec![fold.to_string()];
        for model in 0..scores.ncols() {
            record.push(num(scores[[fold, model]]));
        }
        writer.write_record(&record)?;
    }
    writer.flush().context("writing CV scores")?;
    Ok(())
}

/// Ranking table: average rank per family plus the Friedman statistic and
/// each family's paired-t p-value against the winner.
pub fn write_rank_csv(names: &[String], report: &RankReport, path: &Path) -> Result<()> {
    let mut writer = open(path)?;
    writer.write_record([
        "family",
        "average_rank",
        "friedman_statistic",
        "p_value_vs_winner",
    ])?;
    for (index, name) in names.iter().enumerate() {
        writer.write_record([
            name.as_str(),
            &num(report.average_ranks[index]),
            &num(report.friedman_statistic),
            &cell(report.pairwise_p[index]),
        ])?;
    }
    writer.flush().context("writing rank report")?;
    Ok(())
}

/// One row per data row: outlier score and whether it exceeds `threshold`.
pub fn write_lof_scores_csv(result: &LofResult, threshold: f64, path: &Path) -> Result<()> {
    let mut writer = open(path)?;
    writer.write_record(["row", "score", "flagged"])?;
    for (row, &score) in result.scores.iter().enumerate() {
        writer.write_record([
            row.to_string(),
            num(score),
            String::from(if score > threshold { "1" } else { "0" }),
        ])?;
    }
    writer.flush().context("writing outlier scores")?;
    Ok(())
}

/// The with/without-removal comparison behind the outlier decision.
pub struct LofDecision {
    pub k: usize,
    pub threshold: f64,
    pub rows_flagged: usize,
    pub median_r2_all: f64,
    pub median_r2_removed: f64,
    pub relative_improvement: f64,
    pub margin: f64,
    pub applied: bool,
}

pub fn write_lof_decision_csv(decision: &LofDecision, path: &Path) -> Result<()> {
    let mut writer = open(path)?;
    writer.write_record(["measure", "value"])?;
    for (measure, value) in [
        ("k", decision.k.to_string()),
        ("threshold", num(decision.threshold)),
        ("rows_flagged", decision.rows_flagged.to_string()),
        ("median_r2_all", num(decision.median_r2_all)),
        ("median_r2_removed", num(decision.median_r2_removed)),
        (
            "relative_improvement",
            num(decision.relative_improvement),
        ),
        ("margin", num(decision.margin)),
        ("applied", (decision.applied as u8).to_string()),
    ] {
        writer.write_record([measure, &value])?;
    }
    writer.flush().context("writing outlier decision")?;
    Ok(())
}

/// Full importance ordering; eliminated features also carry the 1-based
/// round in which they were dropped.
pub fn write_rfe_ranking_csv(result: &RfeResult, path: &Path) -> Result<()> {
    let mut writer = open(path)?;
    writer.write_record(["rank", "feature", "eliminated_round"])?;
    for (index, feature) in result.ranking.iter().enumerate() {
        let round = result
            .elimination_rounds
            .iter()
            .find(|(name, _)| name == feature)
            .map(|(_, round)| round.to_string())
            .unwrap_or_default();
        writer.write_record([&(index + 1).to_string(), feature.as_str(), &round])?;
    }
    writer.flush().context("writing elimination ranking")?;
    Ok(())
}

/// Subset-size sweep curve: cross-validated R^2 against feature count.
pub fn write_rfe_sweep_csv(
    sweep: &std::collections::BTreeMap<usize, (f64, f64)>,
    path: &Path,
) -> Result<()> {
    let mut writer = open(path)?;
    writer.write_record(["k", "mean_r2", "median_r2"])?;
    for (k, (mean, median)) in sweep {
        writer.write_record([&k.to_string(), &num(*mean), &num(*median)])?;
    }
    writer.flush().context("writing sweep curve")?;
    Ok(())
}

pub fn write_selected_features_csv(names: &[String], path: &Path) -> Result<()> {
    let mut writer = open(path)?;
    writer.write_record(["feature"])?;
    for name in names {
        writer.write_record([name.as_str()])?;
    }
    writer.flush().context("writing selected features")?;
    Ok(())
}

pub struct RefitRow {
    pub refit: usize,
    pub seed: u64,
    pub holdout_r2: f64,
    pub chosen: bool,
}

pub fn write_train_refits_csv(rows: &[RefitRow], path: &Path) -> Result<()> {
    let mut writer = open(path)?;
    writer.write_record(["refit", "seed", "holdout_r2", "chosen"])?;
    for row in rows {
        writer.write_record([
            row.refit.to_string(),
            row.seed.to_string(),
            num(row.holdout_r2),
            String::from(if row.chosen { "1" } else { "0" }),
        ])?;
    }
    writer.flush().context("writing refit table")?;
    Ok(())
}

//! Human-readable run report, assembled from the CSV artifacts a manifest
//! points at.
//!
//! The report always carries the same six sections — descriptive
//! statistics, model ranking, the chosen model, feature selection, the
//! optimizer comparison, and the candidate solutions table. Sections whose
//! stage did not complete are flagged rather than omitted, and the header
//! marks the whole report as partial when any core stage is missing.

use std::path::Path;

use anyhow::{Context, Result};

use millopt_core::metrics::table::format_scientific;

use crate::manifest::RunManifest;

/// Stages every complete run must have; their absence marks the report
/// partial. The outlier and elimination stages are optional by config.
const CORE_STAGES: [&str; 6] = ["load", "stats", "compare", "rank", "train", "optimize"];

pub fn render(root: &Path, manifest: &RunManifest) -> Result<String> {
    let missing: Vec<&str> = CORE_STAGES
        .iter()
        .copied()
        .filter(|stage| {
            manifest
                .stage(stage)
                .map(|record| record.status != "complete")
                .unwrap_or(true)
        })
        .collect();

    let mut text = String::new();
    text.push_str("process-parameter optimization report\n");
    text.push_str("======================================\n");
    text.push_str(&format!("toolkit version: {}\n", manifest.version));
    text.push_str(&format!("config hash:     {}\n", manifest.config_hash));
    text.push_str(&format!("master seed:     {}\n", manifest.master_seed));
    if missing.is_empty() {
        text.push_str("coverage:        complete\n");
    } else {
        text.push_str(&format!(
            "coverage:        partial (missing: {})\n",
            missing.join(", ")
        ));
    }
    text.push('\n');

    section_stats(&mut text, root, manifest);
    section_ranking(&mut text, root, manifest);
    section_chosen_model(&mut text, root, manifest);
    section_features(&mut text, root, manifest);
    section_optimizers(&mut text, root, manifest);
    section_candidates(&mut text, root, manifest);

    Ok(text)
}

/// Read a CSV file into (header, rows).
fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let header = reader
        .headers()
        .context("reading header")?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        rows.push(record?.iter().map(|s| s.to_string()).collect());
    }
    Ok((header, rows))
}

/// Render rows as a fixed-width table with a header underline.
fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let columns = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (index, value) in row.iter().enumerate().take(columns) {
            widths[index] = widths[index].max(value.len());
        }
    }
    let mut out = String::new();
    let render_row = |row: &[String]| -> String {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .take(columns)
            .map(|(index, value)| format!("{:>width$}", value, width = widths[index]))
            .collect();
        format!("  {}\n", cells.join("  "))
    };
    out.push_str(&render_row(header));
    let underline: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&render_row(&underline));
    for row in rows {
        out.push_str(&render_row(row));
    }
    out
}

/// Reformat a numeric cell in compact scientific notation; anything
/// non-numeric (names, counts with units, empty cells) passes through.
fn compact(value: &str) -> String {
    match value.parse::<f64>() {
        Ok(parsed) if value.contains('.') || value.contains('e') || value.contains('E') => {
            format_scientific(parsed)
        }
        _ => value.to_string(),
    }
}

fn compact_rows(rows: Vec<Vec<String>>) -> Vec<Vec<String>> {
    rows.into_iter()
        .map(|row| row.iter().map(|cell| compact(cell)).collect())
        .collect()
}

fn unavailable(text: &mut String, stage: &str, manifest: &RunManifest) {
    let reason = match manifest.stage(stage) {
        Some(record) if record.status != "complete" => format!("stage '{stage}' failed"),
        Some(_) => format!("stage '{stage}' produced no readable artifact"),
        None => format!("stage '{stage}' was not run"),
    };
    text.push_str(&format!("  [unavailable — {reason}]\n"));
}

fn section_stats(text: &mut String, root: &Path, manifest: &RunManifest) {
    text.push_str("1. descriptive statistics\n");
    match manifest
        .artifact(root, "stats", "stats.csv")
        .and_then(|path| read_csv(&path).ok())
    {
        Some((header, rows)) => {
            let keep = [0usize, 1, 4, 5, 6, 7, 8];
            let header: Vec<String> = keep.iter().map(|&i| header[i].clone()).collect();
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|row| keep.iter().map(|&i| compact(&row[i])).collect())
                .collect();
            text.push_str(&table(&header, &rows));
        }
        None => unavailable(text, "stats", manifest),
    }
    text.push('\n');
}

fn section_ranking(text: &mut String, root: &Path, manifest: &RunManifest) {
    text.push_str("2. model comparison and ranking\n");
    match manifest
        .artifact(root, "rank", "rank.csv")
        .and_then(|path| read_csv(&path).ok())
    {
        Some((header, rows)) => {
            if let Some(first) = rows.first() {
                text.push_str(&format!(
                    "  Friedman statistic: {}\n",
                    compact(&first[2])
                ));
            }
            let keep = [0usize, 1, 3];
            let header: Vec<String> = keep.iter().map(|&i| header[i].clone()).collect();
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|row| keep.iter().map(|&i| compact(&row[i])).collect())
                .collect();
            text.push_str(&table(&header, &rows));
        }
        None => unavailable(text, "rank", manifest),
    }
    text.push('\n');
}

fn section_chosen_model(text: &mut String, root: &Path, manifest: &RunManifest) {
    text.push_str("3. chosen model\n");
    if manifest.winner_family.is_empty() {
        unavailable(text, "rank", manifest);
        text.push('\n');
        return;
    }
    text.push_str(&format!("  family: {}\n", manifest.winner_family));

    let summary_file = format!("summary_{}.csv", manifest.winner_family);
    match manifest
        .artifact(root, "compare", &summary_file)
        .and_then(|path| read_csv(&path).ok())
    {
        Some((header, rows)) => {
            if let Some(r2_column) = header.iter().position(|h| h == "R2") {
                text.push_str("  cross-validated R2 distribution:\n");
                for row in &rows {
                    text.push_str(&format!(
                        "    {:<13} {}\n",
                        row[0],
                        compact(&row[r2_column])
                    ));
                }
            }
        }
        None => unavailable(text, "compare", manifest),
    }

    match manifest
        .artifact(root, "train", "train_refits.csv")
        .and_then(|path| read_csv(&path).ok())
    {
        Some((_, rows)) => {
            if let Some(chosen) = rows.iter().find(|row| row[3] == "1") {
                text.push_str(&format!(
                    "  refit selection: kept refit {} of {} (holdout R2 {})\n",
                    chosen[0],
                    rows.len(),
                    compact(&chosen[2])
                ));
            }
        }
        None => unavailable(text, "train", manifest),
    }
    text.push('\n');
}

fn section_features(text: &mut String, root: &Path, manifest: &RunManifest) {
    text.push_str("4. feature selection\n");
    let schema_names: Option<Vec<String>> = manifest
        .artifact(root, "load", "schema.csv")
        .and_then(|path| read_csv(&path).ok())
        .map(|(_, rows)| {
            rows.iter()
                .filter(|row| row[4] == "feature")
                .map(|row| row[0].clone())
                .collect()
        });

    match manifest
        .artifact(root, "rfe", "selected_features.csv")
        .and_then(|path| read_csv(&path).ok())
    {
        Some((_, rows)) => {
            let selected: Vec<String> = rows.iter().map(|row| row[0].clone()).collect();
            text.push_str(&format!("  selected ({}):\n", selected.len()));
            for name in &selected {
                text.push_str(&format!("    + {name}\n"));
            }
            if let Some(all) = schema_names {
                let removed: Vec<&String> =
                    all.iter().filter(|name| !selected.contains(name)).collect();
                text.push_str(&format!("  removed ({}):\n", removed.len()));
                for name in removed {
                    text.push_str(&format!("    - {name}\n"));
                }
            }
        }
        None => match manifest.stage("rfe") {
            // Absent from a completed run means the stage was switched off;
            // absent from a failed run means it was never reached.
            None if manifest.status == "complete" => {
                let retained = schema_names.map(|names| names.len());
                match retained {
                    Some(count) => text.push_str(&format!(
                        "  elimination stage disabled; all {count} features retained\n"
                    )),
                    None => text.push_str("  elimination stage disabled; all features retained\n"),
                }
            }
            _ => unavailable(text, "rfe", manifest),
        },
    }
    text.push('\n');
}

fn section_optimizers(text: &mut String, root: &Path, manifest: &RunManifest) {
    text.push_str("5. optimizer comparison (final best per run)\n");
    match manifest
        .artifact(root, "optimize", "campaign_summary.csv")
        .and_then(|path| read_csv(&path).ok())
    {
        Some((header, rows)) => text.push_str(&table(&header, &compact_rows(rows))),
        None => unavailable(text, "optimize", manifest),
    }
    text.push('\n');
}

fn section_candidates(text: &mut String, root: &Path, manifest: &RunManifest) {
    text.push_str("6. candidate solutions for expert review\n");
    match manifest
        .artifact(root, "optimize", "candidates.csv")
        .and_then(|path| read_csv(&path).ok())
    {
        Some((header, rows)) => {
            text.push_str(&format!(
                "  {} candidates from the best method's best run, best first\n",
                rows.len()
            ));
            text.push_str(&table(&header, &compact_rows(rows)));
        }
        None => unavailable(text, "optimize", manifest),
    }
    text.push('\n');
}

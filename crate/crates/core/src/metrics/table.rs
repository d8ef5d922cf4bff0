//! Plain-text table rendering for summaries and rank reports.

use crate::metrics::{FoldSummary, MetricKind, RankReport};

/// Column order used by fold-summary tables.
pub const TABLE_COLUMNS: [MetricKind; 9] = [
    MetricKind::Rmse,
    MetricKind::Mae,
    MetricKind::Evs,
    MetricKind::Msle,
    MetricKind::Smape,
    MetricKind::Mape,
    MetricKind::R2,
    MetricKind::Mse,
    MetricKind::PearsonR,
];

/// Format a value like `5.20E+01` (two-digit mantissa, signed two-digit
/// exponent), the style used throughout the text reports.
pub fn format_scientific(value: f64) -> String {
    if value == 0.0 {
        return "0.00E+00".to_string();
    }
    if !value.is_finite() {
        return format!("{value}");
    }
    let text = format!("{value:.2e}");
    let (mantissa, exponent) = text.split_once('e').expect("exponential format");
    let exp: i32 = exponent.parse().expect("integer exponent");
    format!("{mantissa}E{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

fn cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format_scientific(v),
        None => "NA".to_string(),
    }
}

/// Render a fold summary as rows Min/Max/Mean/Median/STD over metric columns.
pub fn render_fold_summary(title: &str, summary: &FoldSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!("{title} ({} folds)\n", summary.n_folds));
    out.push_str(&format!("{:<8}", ""));
    for kind in TABLE_COLUMNS {
        out.push_str(&format!("{:>10}", kind.label()));
    }
    out.push('\n');
    type StatGetter = fn(&crate::metrics::StatLine) -> f64;
    let rows: [(&str, StatGetter); 5] = [
        ("Min", |l| l.min),
        ("Max", |l| l.max),
        ("Mean", |l| l.mean),
        ("Median", |l| l.median),
        ("STD", |l| l.std),
    ];
    for (label, pick) in rows {
        out.push_str(&format!("{label:<8}"));
        for kind in TABLE_COLUMNS {
            let value = summary.get(kind).map(pick);
            out.push_str(&format!("{:>10}", cell(value)));
        }
        out.push('\n');
    }
    out
}

/// Render a rank report sorted best-first: rank, then p-value vs the best.
pub fn render_rank_report(report: &RankReport) -> String {
    let mut order: Vec<usize> = (0..report.model_names.len()).collect();
    order.sort_by(|&a, &b| {
        report.average_ranks[a]
            .partial_cmp(&report.average_ranks[b])
            .expect("finite ranks")
            .then(a.cmp(&b))
    });
    let mut out = String::new();
    out.push_str(&format!(
        "model ranking (Friedman statistic {})\n",
        format_scientific(report.friedman_statistic)
    ));
    out.push_str(&format!(
        "{:<34}{:>14}{:>12}\n",
        "model", "average rank", "p vs best"
    ));
    for &i in &order {
        let p = match report.pairwise_p[i] {
            Some(p) => format_scientific(p),
            None => "-".to_string(),
        };
        out.push_str(&format!(
            "{:<34}{:>14.2}{:>12}\n",
            report.model_names[i], report.average_ranks[i], p
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{compute_metrics, summarize_folds};

    #[test]
    fn scientific_format_examples() {
        assert_eq!(format_scientific(52.0), "5.20E+01");
        assert_eq!(format_scientific(0.0123), "1.23E-02");
        assert_eq!(format_scientific(-1130.0), "-1.13E+03");
        assert_eq!(format_scientific(0.0), "0.00E+00");
        assert_eq!(format_scientific(9.999), "1.00E+01");
    }

    #[test]
    fn fold_summary_table_lists_all_rows() {
        let reports = vec![
            compute_metrics(&[2.0, 4.0], &[1.0, 2.0]).unwrap(),
            compute_metrics(&[2.0, 5.0], &[1.0, 2.0]).unwrap(),
        ];
        let table = render_fold_summary("cart", &summarize_folds(&reports).unwrap());
        for label in ["Min", "Max", "Mean", "Median", "STD", "RMSE", "SMAPE", "R2"] {
            assert!(table.contains(label), "missing {label} in:\n{table}");
        }
    }

    #[test]
    fn undefined_metric_prints_na() {
        let reports = vec![compute_metrics(&[1.0, 1.0], &[1.0, 2.0]).unwrap()];
        let table = render_fold_summary("m", &summarize_folds(&reports).unwrap());
        assert!(table.contains("NA"));
    }

    #[test]
    fn rank_table_anchors_expected_layout() {
        // Format anchor: a leading ensemble at 2.99 over a runner-up at 3.16.
        let report = RankReport {
            model_names: vec!["ordered boosting".into(), "gradient boosting".into()],
            average_ranks: vec![2.99, 3.16],
            friedman_statistic: 41.7,
            best_index: 0,
            pairwise_p: vec![None, Some(0.03)],
        };
        let table = render_rank_report(&report);
        assert!(table.contains("2.99"));
        assert!(table.contains("3.16"));
        assert!(table.contains('-'));
        assert!(table.contains("3.00E-02"));
        let best_line = table
            .lines()
            .find(|l| l.contains("ordered boosting"))
            .unwrap();
        assert!(best_line.contains("2.99"));
    }
}

//! Standalone subcommands: each pipeline stage runnable on prior artifacts.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ndarray::Array2;

use millopt_core::cv::{compare_models, score_matrix};
use millopt_core::dataset::synthetic::generate_synthetic_mill;
use millopt_core::dataset::{clean, describe, io, Dataset, FeatureSpec};
use millopt_core::metrics::table::render_rank_report;
use millopt_core::metrics::{rank_models, MetricKind};
use millopt_core::models::{serialize, RegressorSpec};
use millopt_core::optimize::{
    run_campaign, write_candidates_csv, write_summary_csv, write_trace_csv, Bounds,
};
use millopt_core::preprocess::{lof_scores, rfe, rfe_sweep};

use crate::config::{PipelineConfig, METHOD_LABELS};
use crate::emit;
use crate::manifest::RunManifest;
use crate::pipeline::{campaign_methods, train_best_of_refits};
use crate::report;
use crate::schema_io;

fn load_data(data: &Path, schema: &Path) -> Result<Dataset> {
    let schema = schema_io::load_schema(schema)?;
    io::load_csv(data, &schema).map_err(Into::into)
}

pub fn stats(data: &Path, schema: &Path, out: &Path, bins: usize) -> Result<()> {
    let data = load_data(data, schema)?;
    let stats = describe(&data, bins)?;
    emit::write_stats_csv(&stats, out)?;
    println!(
        "described {} rows across {} columns -> {}",
        stats.n_rows,
        stats.features.len() + 1,
        out.display()
    );
    Ok(())
}

pub fn clean_command(
    data: &Path,
    schema: &Path,
    out: &Path,
    report_csv: Option<&Path>,
) -> Result<()> {
    let data = load_data(data, schema)?;
    let (cleaned, report) = clean(&data)?;
    io::save_csv(&cleaned, out)?;
    if let Some(path) = report_csv {
        emit::write_clean_report_csv(&report, path)?;
    }
    print!("{}", report.to_text());
    println!("cleaned dataset -> {}", out.display());
    Ok(())
}

pub fn synth(
    n: usize,
    seed: u64,
    noise_std: f64,
    out: &Path,
    schema_out: Option<&Path>,
) -> Result<()> {
    let data = generate_synthetic_mill(n, seed, noise_std)?;
    io::save_csv(&data, out)?;
    println!("generated {n} rows -> {}", out.display());
    if let Some(path) = schema_out {
        schema_io::save_schema(&data.schema, path)?;
        println!("schema -> {}", path.display());
    }
    Ok(())
}

pub fn compare(
    data: &Path,
    schema: &Path,
    families: &[String],
    k: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    if families.is_empty() {
        bail!("--families must name at least one model family");
    }
    let data = load_data(data, schema)?;
    std::fs::create_dir_all(out)?;
    let specs = families
        .iter()
        .map(|family| Ok(RegressorSpec::new(family)?.with_seed(seed)))
        .collect::<Result<Vec<_>>>()?;
    let outcomes = compare_models(&specs, &data, k, seed)?;
    for (family, outcome) in families.iter().zip(&outcomes) {
        let file = out.join(format!("summary_{family}.csv"));
        emit::write_fold_summary_csv(&outcome.summary, &file)?;
        let median = outcome
            .summary
            .get(MetricKind::R2)
            .map(|line| format!("{:.4}", line.median))
            .unwrap_or_else(|| "undefined".into());
        println!("{family}: median R2 {median} -> {}", file.display());
    }
    let scores = score_matrix(&outcomes, MetricKind::R2)?;
    let names: Vec<String> = families.to_vec();
    emit::write_cv_scores_csv(&names, &scores, &out.join("cv_scores.csv"))?;
    println!("fold scores -> {}", out.join("cv_scores.csv").display());
    Ok(())
}

pub fn rank(scores_csv: &Path, out: Option<&Path>) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(scores_csv)
        .with_context(|| format!("opening {}", scores_csv.display()))?;
    let header = reader.headers()?.clone();
    if header.len() < 2 || &header[0] != "fold" {
        bail!("expected a cv_scores.csv file (fold column plus one column per model)");
    }
    let names: Vec<String> = header.iter().skip(1).map(|s| s.to_string()).collect();
    let mut values: Vec<f64> = Vec::new();
    let mut folds = 0;
    for record in reader.records() {
        let record = record?;
        for cell in record.iter().skip(1) {
            values.push(
                cell.parse::<f64>()
                    .with_context(|| format!("bad score {cell:?} in fold {folds}"))?,
            );
        }
        folds += 1;
    }
    let scores = Array2::from_shape_vec((folds, names.len()), values)
        .map_err(|e| anyhow!("ragged score matrix: {e}"))?;
    let ranking = rank_models(&names, &scores, true)?;
    print!("{}", render_rank_report(&ranking));
    let out = out
        .map(PathBuf::from)
        .unwrap_or_else(|| scores_csv.with_file_name("rank.csv"));
    emit::write_rank_csv(&names, &ranking, &out)?;
    println!("rank table -> {}", out.display());
    Ok(())
}

pub fn lof(data: &Path, schema: &Path, k: usize, threshold: Option<f64>, out: &Path) -> Result<()> {
    let data = load_data(data, schema)?;
    let result = lof_scores(&data, k)?;
    let threshold = threshold.unwrap_or(result.threshold);
    emit::write_lof_scores_csv(&result, threshold, out)?;
    let flagged = result.scores.iter().filter(|&&s| s > threshold).count();
    println!(
        "scored {} rows with k={k}; {flagged} above threshold {threshold:.4} -> {}",
        data.n_rows(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn rfe_command(
    data: &Path,
    schema: &Path,
    trainer: &str,
    target_k: Option<usize>,
    sweep_min: usize,
    sweep_max: usize,
    folds: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let data = load_data(data, schema)?;
    std::fs::create_dir_all(out)?;
    let spec = RegressorSpec::new(trainer)?.with_seed(seed);
    let result = match target_k {
        Some(k) => rfe(&data, &spec, k, seed)?,
        None => rfe_sweep(&data, &spec, sweep_min..=sweep_max, folds, seed)?,
    };
    emit::write_rfe_ranking_csv(&result, &out.join("rfe_ranking.csv"))?;
    if let Some(sweep) = &result.sweep {
        emit::write_rfe_sweep_csv(sweep, &out.join("rfe_sweep.csv"))?;
    }
    let selected: Vec<String> = data
        .schema
        .features
        .iter()
        .map(|feature| feature.name.clone())
        .filter(|name| result.selected.contains(name))
        .collect();
    emit::write_selected_features_csv(&selected, &out.join("selected_features.csv"))?;
    println!("kept {} features:", selected.len());
    for name in &selected {
        println!("  + {name}");
    }
    println!("artifacts -> {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn train(
    data: &Path,
    schema: &Path,
    family: &str,
    features: Option<&[String]>,
    refits: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let mut data = load_data(data, schema)?;
    if let Some(keep) = features {
        let indices: Vec<usize> = data
            .schema
            .features
            .iter()
            .enumerate()
            .filter(|(_, feature)| keep.contains(&feature.name))
            .map(|(index, _)| index)
            .collect();
        if indices.len() != keep.len() {
            bail!(
                "--features names {} columns but only {} matched the schema",
                keep.len(),
                indices.len()
            );
        }
        data = data.select_features(&indices)?;
    }
    std::fs::create_dir_all(out)?;
    // Reuse the pipeline's refit selection with a default config carrying
    // no hyperparameter overrides.
    let config = PipelineConfig {
        seed,
        ..PipelineConfig::default()
    };
    let (model, refit_rows) = train_best_of_refits(&config, family, &data, seed, refits)?;
    emit::write_train_refits_csv(&refit_rows, &out.join("train_refits.csv"))?;
    serialize::save_file(&model, &out.join("model.txt"))?;
    print!("{}", serialize::model_info(&model));
    println!("model -> {}", out.join("model.txt").display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn optimize(
    model_path: &Path,
    schema: &Path,
    methods: &[String],
    runs: usize,
    population: usize,
    generations: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let model = serialize::load_file(model_path)?;
    let schema = schema_io::load_schema(schema)?;
    let ordered: Vec<FeatureSpec> = model
        .feature_names
        .iter()
        .map(|name| {
            schema
                .features
                .iter()
                .find(|feature| &feature.name == name)
                .cloned()
                .ok_or_else(|| anyhow!("model input {name:?} is missing from the schema"))
        })
        .collect::<Result<Vec<_>>>()?;
    let bounds = Bounds::from_features(&ordered)?;

    for method in methods {
        if !METHOD_LABELS.contains(&method.as_str()) {
            bail!("unknown method {method:?}; choose from {METHOD_LABELS:?}");
        }
    }
    let config = PipelineConfig {
        campaign: crate::config::CampaignConfig {
            methods: methods.to_vec(),
            runs,
            population,
            generations,
        },
        ..PipelineConfig::default()
    };
    config.validate().context("campaign settings")?;

    std::fs::create_dir_all(out)?;
    let objective = |x: &[f64]| model.predict_row(x).expect("surrogate prediction");
    let campaign = run_campaign(&objective, &bounds, &campaign_methods(&config), runs, seed)?;
    for outcome in &campaign.methods {
        write_trace_csv(outcome, &out.join(format!("trace_{}.csv", outcome.label)))?;
        println!(
            "{}: median final best {:.4} over {} runs",
            outcome.label, outcome.summary.median, runs
        );
    }
    write_summary_csv(&campaign, &out.join("campaign_summary.csv"))?;
    write_candidates_csv(
        &campaign,
        &model.feature_names,
        &model.target_name,
        &out.join("candidates.csv"),
    )?;
    let best = &campaign.methods[campaign.best_method];
    println!(
        "best method: {} (median {:.4}); artifacts -> {}",
        best.label,
        best.summary.median,
        out.display()
    );
    Ok(())
}

pub fn report_command(manifest_path: &Path, out: Option<&Path>) -> Result<()> {
    let manifest = RunManifest::load(manifest_path)?;
    let root = manifest_path
        .parent()
        .ok_or_else(|| anyhow!("manifest path has no parent directory"))?;
    let text = report::render(root, &manifest)?;
    print!("{text}");
    let out = out
        .map(PathBuf::from)
        .unwrap_or_else(|| root.join("report.txt"));
    std::fs::write(&out, &text).with_context(|| format!("writing {}", out.display()))?;
    println!("report -> {}", out.display());
    Ok(())
}

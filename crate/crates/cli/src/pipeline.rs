//! End-to-end pipeline: clean, compare under CV, rank, outlier study,
//! feature elimination, final training, optimization campaign, report.
//!
//! Stages run sequentially. Each records its artifacts in the manifest as
//! soon as they are written; a failing stage is recorded as `incomplete`
//! with whatever partial artifacts it produced, the manifest is saved, and
//! the error is surfaced tagged with the stage name. Every random decision
//! derives from the master seed, so a rerun with the same config reproduces
//! every artifact byte for byte regardless of thread count.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{anyhow, Context, Result};

use millopt_core::cv::{compare_models, cross_validate, score_matrix};
use millopt_core::dataset::synthetic::generate_synthetic_mill;
use millopt_core::dataset::{clean, describe, io, kfold_split, Dataset};
use millopt_core::metrics::{rank_models, MetricKind};
use millopt_core::models::{fit, serialize, FittedModel};
use millopt_core::optimize::{
    run_campaign, write_candidates_csv, write_summary_csv, write_trace_csv, Algorithm, Bounds,
    MethodSpec, OptimizerConfig,
};
use millopt_core::preprocess::{lof_scores, remove_outliers, rfe, rfe_sweep};
use millopt_core::seeding::{derive_seed, name_tag};

use crate::config::PipelineConfig;
use crate::emit;
use crate::manifest::{unix_now, RunManifest, StageRecord};
use crate::report;
use crate::schema_io;

struct StageRunner<'a> {
    manifest: RunManifest,
    out: &'a Path,
}

impl StageRunner<'_> {
    /// Run one stage, recording its artifacts and saving the manifest.
    /// On failure the stage is recorded as incomplete (keeping partial
    /// artifacts listed) and the error is tagged with the stage name.
    fn run<T>(
        &mut self,
        name: &str,
        stage: impl FnOnce(&mut Vec<String>) -> Result<T>,
    ) -> Result<T> {
        let mut artifacts = Vec::new();
        match stage(&mut artifacts) {
            Ok(value) => {
                println!("stage {name}: complete ({} artifacts)", artifacts.len());
                self.manifest.stages.push(StageRecord {
                    name: name.into(),
                    status: "complete".into(),
                    artifacts,
                });
                self.manifest.save(self.out)?;
                Ok(value)
            }
            Err(error) => {
                self.manifest.stages.push(StageRecord {
                    name: name.into(),
                    status: "incomplete".into(),
                    artifacts,
                });
                self.manifest.status = format!("failed at stage '{name}'");
                self.manifest.finished_unix = unix_now();
                let _ = self.manifest.save(self.out);
                Err(error.context(format!("stage '{name}'")))
            }
        }
    }
}

pub fn run_pipeline(config: &PipelineConfig, out: &Path) -> Result<RunManifest> {
    config.validate().context("stage 'configure'")?;
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let master = config.seed;

    let mut runner = StageRunner {
        manifest: RunManifest::new(config.hash()?, master),
        out,
    };

    runner.run("configure", |artifacts| {
        std::fs::write(out.join("config.toml"), config.to_toml()?)
            .context("writing effective config")?;
        artifacts.push("config.toml".into());
        Ok(())
    })?;

    let mut data = runner.run("load", |artifacts| {
        let data = match config.data.source.as_str() {
            "synthetic" => {
                let synth = &config.data.synthetic;
                generate_synthetic_mill(synth.n, synth.seed, synth.noise_std)?
            }
            _ => {
                let schema = schema_io::load_schema(Path::new(&config.data.schema))?;
                io::load_csv(Path::new(&config.data.csv), &schema)?
            }
        };
        schema_io::save_schema(&data.schema, &out.join("schema.csv"))?;
        artifacts.push("schema.csv".into());
        Ok(data)
    })?;

    runner.run("stats", |artifacts| {
        let stats = describe(&data, 10)?;
        emit::write_stats_csv(&stats, &out.join("stats.csv"))?;
        artifacts.push("stats.csv".into());
        Ok(())
    })?;

    if config.clean.enabled {
        data = runner.run("clean", |artifacts| {
            let (cleaned, clean_report) = clean(&data)?;
            emit::write_clean_report_csv(&clean_report, &out.join("clean_report.csv"))?;
            artifacts.push("clean_report.csv".into());
            io::save_csv(&cleaned, &out.join("dataset.csv"))?;
            artifacts.push("dataset.csv".into());
            Ok(cleaned)
        })?;
    }

    let names = config.models.roster.clone();
    let scores = runner.run("compare", |artifacts| {
        let specs = names
            .iter()
            .map(|family| {
                config.build_spec(family, derive_seed(master, &[name_tag("model"), name_tag(family)]))
            })
            .collect::<Result<Vec<_>>>()?;
        let outcomes = compare_models(
            &specs,
            &data,
            config.cv.k,
            derive_seed(master, &[name_tag("cv_folds")]),
        )?;
        for (family, outcome) in names.iter().zip(&outcomes) {
            let file = format!("summary_{family}.csv");
            emit::write_fold_summary_csv(&outcome.summary, &out.join(&file))?;
            artifacts.push(file);
        }
        let scores = score_matrix(&outcomes, MetricKind::R2)?;
        emit::write_cv_scores_csv(&names, &scores, &out.join("cv_scores.csv"))?;
        artifacts.push("cv_scores.csv".into());
        Ok(scores)
    })?;

    let ranking = runner.run("rank", |artifacts| {
        let ranking = rank_models(&names, &scores, true)?;
        emit::write_rank_csv(&names, &ranking, &out.join("rank.csv"))?;
        artifacts.push("rank.csv".into());
        Ok(ranking)
    })?;
    let winner = if config.models.pinned.is_empty() {
        names[ranking.best_index].clone()
    } else {
        config.models.pinned.clone()
    };
    runner.manifest.winner_family = winner.clone();
    runner.manifest.save(out)?;

    if config.lof.enabled {
        data = runner.run("lof", |artifacts| {
            let result = lof_scores(&data, config.lof.k)?;
            let threshold = if config.lof.threshold > 0.0 {
                config.lof.threshold
            } else {
                result.threshold
            };
            emit::write_lof_scores_csv(&result, threshold, &out.join("lof_scores.csv"))?;
            artifacts.push("lof_scores.csv".into());

            let removed = remove_outliers(&data, &result, threshold)?;
            let rows_flagged = data.n_rows() - removed.n_rows();
            let spec = config.build_spec(&winner, derive_seed(master, &[name_tag("lof_model")]))?;
            let lof_seed = derive_seed(master, &[name_tag("lof_cv")]);
            let median_r2 = |subset: &Dataset| -> Result<f64> {
                let outcome = cross_validate(&spec, subset, config.cv.k, lof_seed)?;
                outcome
                    .summary
                    .get(MetricKind::R2)
                    .map(|line| line.median)
                    .ok_or_else(|| anyhow!("median R^2 undefined in outlier comparison"))
            };
            let median_r2_all = median_r2(&data)?;
            let median_r2_removed = median_r2(&removed)?;
            let relative_improvement =
                (median_r2_removed - median_r2_all) / median_r2_all.abs().max(1e-12);
            let applied = relative_improvement > config.lof.margin;
            emit::write_lof_decision_csv(
                &emit::LofDecision {
                    k: config.lof.k,
                    threshold,
                    rows_flagged,
                    median_r2_all,
                    median_r2_removed,
                    relative_improvement,
                    margin: config.lof.margin,
                    applied,
                },
                &out.join("lof_decision.csv"),
            )?;
            artifacts.push("lof_decision.csv".into());

            if applied {
                io::save_csv(&removed, &out.join("dataset_outliers_removed.csv"))?;
                artifacts.push("dataset_outliers_removed.csv".into());
                Ok(removed)
            } else {
                Ok(data.clone())
            }
        })?;
    }

    if config.rfe.enabled {
        data = runner.run("rfe", |artifacts| {
            let trainer_family = if config.rfe.trainer.is_empty() {
                winner.as_str()
            } else {
                config.rfe.trainer.as_str()
            };
            let trainer =
                config.build_spec(trainer_family, derive_seed(master, &[name_tag("rfe_model")]))?;
            let rfe_seed = derive_seed(master, &[name_tag("rfe")]);
            let result = if config.rfe.target_k > 0 {
                rfe(&data, &trainer, config.rfe.target_k, rfe_seed)?
            } else {
                let sweep_max = config.rfe.sweep_max.min(data.n_features());
                let sweep_min = config.rfe.sweep_min.min(sweep_max);
                rfe_sweep(&data, &trainer, sweep_min..=sweep_max, config.rfe.folds, rfe_seed)?
            };
            emit::write_rfe_ranking_csv(&result, &out.join("rfe_ranking.csv"))?;
            artifacts.push("rfe_ranking.csv".into());
            if let Some(sweep) = &result.sweep {
                emit::write_rfe_sweep_csv(sweep, &out.join("rfe_sweep.csv"))?;
                artifacts.push("rfe_sweep.csv".into());
            }

            // Canonical order: schema order of the surviving features.
            let keep: BTreeSet<&String> = result.selected.iter().collect();
            let indices: Vec<usize> = data
                .schema
                .features
                .iter()
                .enumerate()
                .filter(|(_, feature)| keep.contains(&feature.name))
                .map(|(index, _)| index)
                .collect();
            let selected: Vec<String> = indices
                .iter()
                .map(|&index| data.schema.features[index].name.clone())
                .collect();
            emit::write_selected_features_csv(&selected, &out.join("selected_features.csv"))?;
            artifacts.push("selected_features.csv".into());

            let reduced = data.select_features(&indices)?;
            io::save_csv(&reduced, &out.join("dataset_selected.csv"))?;
            artifacts.push("dataset_selected.csv".into());
            Ok(reduced)
        })?;
    }

    let model = runner.run("train", |artifacts| {
        let (model, refits) = train_best_of_refits(
            config,
            &winner,
            &data,
            master,
            config.models.best_of_refits,
        )?;
        emit::write_train_refits_csv(&refits, &out.join("train_refits.csv"))?;
        artifacts.push("train_refits.csv".into());
        serialize::save_file(&model, &out.join("model.txt"))?;
        artifacts.push("model.txt".into());
        Ok(model)
    })?;

    runner.run("optimize", |artifacts| {
        let bounds = Bounds::from_features(&data.schema.features)?;
        let methods = campaign_methods(config);
        let objective = |x: &[f64]| model.predict_row(x).expect("surrogate prediction");
        let campaign = run_campaign(
            &objective,
            &bounds,
            &methods,
            config.campaign.runs,
            derive_seed(master, &[name_tag("campaign")]),
        )?;
        for outcome in &campaign.methods {
            let file = format!("trace_{}.csv", outcome.label);
            write_trace_csv(outcome, &out.join(&file))?;
            artifacts.push(file);
        }
        write_summary_csv(&campaign, &out.join("campaign_summary.csv"))?;
        artifacts.push("campaign_summary.csv".into());
        let feature_names: Vec<String> = data
            .schema
            .features
            .iter()
            .map(|feature| feature.name.clone())
            .collect();
        write_candidates_csv(
            &campaign,
            &feature_names,
            &data.schema.target.name,
            &out.join("candidates.csv"),
        )?;
        artifacts.push("candidates.csv".into());
        Ok(())
    })?;

    let snapshot = runner.manifest.clone();
    runner.run("report", |artifacts| {
        let text = report::render(out, &snapshot)?;
        std::fs::write(out.join("report.txt"), text).context("writing report")?;
        artifacts.push("report.txt".into());
        Ok(())
    })?;

    runner.manifest.status = "complete".into();
    runner.manifest.finished_unix = unix_now();
    runner.manifest.save(out)?;
    Ok(runner.manifest)
}

/// Fit `family` `refits` times with distinct derived seeds, score each on a
/// fixed 20% holdout, then refit the winner's seed on all rows.
pub fn train_best_of_refits(
    config: &PipelineConfig,
    family: &str,
    data: &Dataset,
    master: u64,
    refits: usize,
) -> Result<(FittedModel, Vec<emit::RefitRow>)> {
    let folds = kfold_split(data.n_rows(), 5, derive_seed(master, &[name_tag("holdout")]))?;
    let train_data = data.select_rows(&folds.train_indices(0))?;
    let holdout = data.select_rows(&folds.test_indices(0))?;
    let actual: Vec<f64> = holdout.target.to_vec();

    let mut rows: Vec<emit::RefitRow> = Vec::with_capacity(refits);
    for refit in 0..refits {
        let seed = derive_seed(master, &[name_tag("refit"), refit as u64]);
        let spec = config.build_spec(family, seed)?;
        let fitted = fit(&spec, &train_data)?;
        let predictions = fitted.predict_dataset(&holdout)?;
        let report = millopt_core::metrics::compute_metrics(&predictions, &actual)?;
        let holdout_r2 = report
            .r2
            .ok_or_else(|| anyhow!("holdout R^2 undefined while selecting a refit"))?;
        rows.push(emit::RefitRow {
            refit,
            seed,
            holdout_r2,
            chosen: false,
        });
    }
    // Strict comparison keeps the first of tied refits.
    let mut best = 0;
    for (index, row) in rows.iter().enumerate().skip(1) {
        if row.holdout_r2 > rows[best].holdout_r2 {
            best = index;
        }
    }
    rows[best].chosen = true;

    let spec = config.build_spec(family, rows[best].seed)?;
    let model = fit(&spec, data)?;
    Ok((model, rows))
}

/// Translate config method labels into campaign specifications, giving the
/// samplers the same evaluation budget as the optimizers.
pub fn campaign_methods(config: &PipelineConfig) -> Vec<MethodSpec> {
    let population = config.campaign.population;
    let generations = config.campaign.generations;
    let budget = config.evaluation_budget();
    config
        .campaign
        .methods
        .iter()
        .map(|label| match label.as_str() {
            "de" => MethodSpec::Optimizer(OptimizerConfig::new(Algorithm::De, population, generations, 0)),
            "ga" => MethodSpec::Optimizer(OptimizerConfig::new(Algorithm::Ga, population, generations, 0)),
            "pso" => MethodSpec::Optimizer(OptimizerConfig::new(Algorithm::Pso, population, generations, 0)),
            "uniform" => MethodSpec::UniformSearch { n: budget },
            _ => MethodSpec::LatinHypercube { n: budget },
        })
        .collect()
}

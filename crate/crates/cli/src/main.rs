//! `millopt` — process-parameter modelling and optimization from the
//! command line.
//!
//! The `pipeline` subcommand orchestrates the full study from a TOML
//! configuration; every other subcommand runs one stage standalone on
//! explicit inputs so prior artifacts can be inspected or recomputed.

mod commands;
mod config;
mod emit;
mod manifest;
mod pipeline;
mod report;
mod schema_io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::PipelineConfig;

#[derive(Parser)]
#[command(name = "millopt", version, about = "Surrogate modelling and process-parameter optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics for every column of a dataset.
    Stats {
        /// Dataset CSV.
        data: PathBuf,
        /// Schema CSV (name,unit,lower,upper,role).
        #[arg(long)]
        schema: PathBuf,
        /// Output CSV.
        #[arg(long, short, default_value = "stats.csv")]
        out: PathBuf,
        /// Histogram bins per column.
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Drop rows with non-finite or out-of-bounds values.
    Clean {
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Cleaned dataset CSV.
        #[arg(long, short)]
        out: PathBuf,
        /// Optional per-rule removal counts CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate the synthetic grinding-circuit dataset.
    Synth {
        /// Number of rows.
        #[arg(long, short)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Gaussian noise standard deviation on the target.
        #[arg(long, default_value_t = 30.0)]
        noise_std: f64,
        #[arg(long, short)]
        out: PathBuf,
        /// Also write the generator's schema here.
        #[arg(long)]
        schema_out: Option<PathBuf>,
    },
    /// Cross-validate model families side by side on shared folds.
    Compare {
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Comma-separated family names.
        #[arg(long, value_delimiter = ',')]
        families: Vec<String>,
        /// Fold count.
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output directory for summaries and fold scores.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Rank models from a fold-score matrix (cv_scores.csv).
    Rank {
        scores: PathBuf,
        /// Output CSV (defaults to rank.csv beside the input).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Score rows by local outlier factor.
    Lof {
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Neighbourhood size.
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Score cutoff (defaults to the 99th percentile).
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, short, default_value = "lof_scores.csv")]
        out: PathBuf,
    },
    /// Rank features by permutation importance and eliminate the weakest.
    Rfe {
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Family used to score candidate subsets.
        #[arg(long)]
        trainer: String,
        /// Fixed subset size; omit to sweep instead.
        #[arg(long)]
        target_k: Option<usize>,
        #[arg(long, default_value_t = 10)]
        sweep_min: usize,
        #[arg(long, default_value_t = 20)]
        sweep_max: usize,
        /// Fold count for sweep scoring.
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Train a family, keeping the best of several seeded refits.
    Train {
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        family: String,
        /// Comma-separated feature subset (defaults to all).
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<String>>,
        #[arg(long, default_value_t = 5)]
        refits: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output directory for model.txt and the refit table.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Maximize a trained surrogate with optimizers and baseline samplers.
    Optimize {
        /// Serialized model file.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Comma-separated labels: de, ga, pso, uniform, latin_hypercube.
        #[arg(long, value_delimiter = ',', default_values_t = config::METHOD_LABELS.map(String::from))]
        methods: Vec<String>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 25)]
        population: usize,
        #[arg(long, default_value_t = 49)]
        generations: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Render the human-readable report for a finished (or partial) run.
    Report {
        #[arg(long)]
        manifest: PathBuf,
        /// Output file (defaults to report.txt beside the manifest).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the full study from a configuration file.
    Pipeline {
        #[arg(long, short)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Stats {
            data,
            schema,
            out,
            bins,
        } => commands::stats(&data, &schema, &out, bins),
        Command::Clean {
            data,
            schema,
            out,
            report,
        } => commands::clean_command(&data, &schema, &out, report.as_deref()),
        Command::Synth {
            n,
            seed,
            noise_std,
            out,
            schema_out,
        } => commands::synth(n, seed, noise_std, &out, schema_out.as_deref()),
        Command::Compare {
            data,
            schema,
            families,
            k,
            seed,
            out,
        } => commands::compare(&data, &schema, &families, k, seed, &out),
        Command::Rank { scores, out } => commands::rank(&scores, out.as_deref()),
        Command::Lof {
            data,
            schema,
            k,
            threshold,
            out,
        } => commands::lof(&data, &schema, k, threshold, &out),
        Command::Rfe {
            data,
            schema,
            trainer,
            target_k,
            sweep_min,
            sweep_max,
            folds,
            seed,
            out,
        } => commands::rfe_command(
            &data, &schema, &trainer, target_k, sweep_min, sweep_max, folds, seed, &out,
        ),
        Command::Train {
            data,
            schema,
            family,
            features,
            refits,
            seed,
            out,
        } => commands::train(
            &data,
            &schema,
            &family,
            features.as_deref(),
            refits,
            seed,
            &out,
        ),
        Command::Optimize {
            model,
            schema,
            methods,
            runs,
            population,
            generations,
            seed,
            out,
        } => commands::optimize(
            &model,
            &schema,
            &methods,
            runs,
            population,
            generations,
            seed,
            &out,
        ),
        Command::Report { manifest, out } => commands::report_command(&manifest, out.as_deref()),
        Command::Pipeline { config, seed, out } => {
            let mut config = PipelineConfig::load(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if let Some(out) = out {
                config.output.dir = out.display().to_string();
            }
            let out = PathBuf::from(&config.output.dir);
            let manifest = pipeline::run_pipeline(&config, &out)?;
            println!(
                "pipeline complete: winner {}, manifest -> {}",
                manifest.winner_family,
                out.join(manifest::MANIFEST_FILE).display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}

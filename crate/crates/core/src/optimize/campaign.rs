//! Repeated-run comparison of optimizers and sampling baselines on one
//! objective, with summary statistics and CSV export of every artifact.

use std::path::Path;

use rayon::prelude::*;

use super::{
    de_optimize, ga_optimize, latin_hypercube_sample, pso_optimize, uniform_sample, Algorithm,
    Bounds, ConvergenceTrace, Individual, OptimizerConfig, RunTrace, SampleBatch,
};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;

/// How many of a sampler's top-scoring points stand in for a "final
/// population" in candidate exports; chosen to match the default optimizer
/// population so the exports are comparable.
pub const SAMPLER_CANDIDATES: usize = 25;

/// One competitor in a campaign.
#[derive(Debug, Clone)]
pub enum MethodSpec {
    /// A population-based optimizer; its `seed` field is ignored in favour of
    /// campaign-derived per-run seeds.
    Optimizer(OptimizerConfig),
    /// Uniform random search with `n` evaluations per run.
    UniformSearch { n: usize },
    /// Latin hypercube sampling with `n` evaluations per run.
    LatinHypercube { n: usize },
}

impl MethodSpec {
    /// Short name used in reports and export file names.
    pub fn label(&self) -> &'static str {
        match self {
            MethodSpec::Optimizer(config) => config.algorithm.name(),
            MethodSpec::UniformSearch { .. } => "uniform",
            MethodSpec::LatinHypercube { .. } => "latin_hypercube",
        }
    }
}

/// Per-checkpoint spread of best-so-far fitness across runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Box-plot statistics (linear-interpolation quartiles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumberSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumberSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        }
    }
}

/// Linear-interpolated quantile of an already sorted slice, `q` in [0, 1].
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Everything recorded for one method across its repeated runs.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub label: String,
    pub trace: ConvergenceTrace,
    /// Final best fitness of each run.
    pub final_bests: Vec<f64>,
    pub summary: FiveNumberSummary,
    /// Across-run min/mean/max at every checkpoint.
    pub envelope: Vec<Envelope>,
}

/// Outcome of a full campaign.
#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub methods: Vec<MethodOutcome>,
    /// Index of the method with the highest median final best (first wins
    /// ties).
    pub best_method: usize,
    /// Index of that method's best run.
    pub best_run: usize,
    /// The best run's final population, sorted by descending fitness.
    pub candidates: Vec<Individual>,
}

fn sampler_trace(batch: SampleBatch, evaluations: usize) -> RunTrace {
    let mut top = batch.samples;
    top.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
    top.truncate(SAMPLER_CANDIDATES);
    RunTrace {
        best_so_far: vec![batch.best.fitness],
        best: batch.best,
        evaluations,
        final_population: top,
    }
}

fn execute_run<F>(
    method: &MethodSpec,
    objective: &F,
    bounds: &Bounds,
    run_seed: u64,
) -> Result<RunTrace>
where
    F: Fn(&[f64]) -> f64,
{
    match method {
        MethodSpec::Optimizer(config) => {
            let mut seeded = config.clone();
            seeded.seed = run_seed;
            match seeded.algorithm {
                Algorithm::De => de_optimize(objective, bounds, &seeded),
                Algorithm::Ga => ga_optimize(objective, bounds, &seeded),
                Algorithm::Pso => pso_optimize(objective, bounds, &seeded),
            }
        }
        MethodSpec::UniformSearch { n } => {
            Ok(sampler_trace(uniform_sample(objective, bounds, *n, run_seed)?, *n))
        }
        MethodSpec::LatinHypercube { n } => Ok(sampler_trace(
            latin_hypercube_sample(objective, bounds, *n, run_seed)?,
            *n,
        )),
    }
}

/// Runs every method `runs` times and aggregates traces, envelopes, and
/// final-best statistics.
///
/// Run seeds derive from `(master seed, method position, run index)`, so the
/// outcome is bit-identical for a given configuration regardless of how many
/// threads execute the runs. The winning method is the one with the highest
/// median final best; its best run's final population is exported as the
/// candidate solutions.
pub fn run_campaign<F>(
    objective: &F,
    bounds: &Bounds,
    methods: &[MethodSpec],
    runs: usize,
    seed: u64,
) -> Result<CampaignReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if methods.is_empty() {
        return Err(Error::EmptyInput {
            context: "campaign method list".into(),
        });
    }
    if runs < 1 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    for method in methods {
        if let MethodSpec::Optimizer(config) = method {
            config.validate()?;
        }
    }

    let mut outcomes = Vec::with_capacity(methods.len());
    for (m, method) in methods.iter().enumerate() {
        let run_seeds: Vec<u64> = (0..runs)
            .map(|r| derive_seed(seed, &[m as u64, r as u64]))
            .collect();
        let run_traces: Result<Vec<RunTrace>> = run_seeds
            .par_iter()
            .map(|&s| execute_run(method, objective, bounds, s))
            .collect();
        let trace = ConvergenceTrace::from_runs(run_traces?)?;

        let final_bests = trace.final_bests();
        let summary = FiveNumberSummary::from_values(&final_bests);
        let envelope = (0..trace.n_checkpoints())
            .map(|c| {
                let column = trace.best_so_far.column(c);
                Envelope {
                    min: column.iter().fold(f64::INFINITY, |a, &b| a.min(b)),
                    mean: column.sum() / column.len() as f64,
                    max: column.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)),
                }
            })
            .collect();

        outcomes.push(MethodOutcome {
            label: method.label().to_owned(),
            trace,
            final_bests,
            summary,
            envelope,
        });
    }

    let mut best_method = 0;
    for (m, outcome) in outcomes.iter().enumerate().skip(1) {
        if outcome.summary.median > outcomes[best_method].summary.median {
            best_method = m;
        }
    }
    let winner = &outcomes[best_method];
    let mut best_run = 0;
    for (r, &v) in winner.final_bests.iter().enumerate().skip(1) {
        if v > winner.final_bests[best_run] {
            best_run = r;
        }
    }
    let mut candidates = winner.trace.final_populations[best_run].clone();
    candidates.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));

    Ok(CampaignReport {
        methods: outcomes,
        best_method,
        best_run,
        candidates,
    })
}

/// Writes one method's best-so-far curves as rows of
/// `(run, generation, best_so_far)`.
pub fn write_trace_csv(outcome: &MethodOutcome, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["run", "generation", "best_so_far"])?;
    for run in 0..outcome.trace.n_runs() {
        for generation in 0..outcome.trace.n_checkpoints() {
            writer.write_record([
                run.to_string(),
                generation.to_string(),
                format!("{}", outcome.trace.best_so_far[[run, generation]]),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Writes the per-method box-plot statistics and evaluation counts.
pub fn write_summary_csv(report: &CampaignReport, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "method",
        "min",
        "q1",
        "median",
        "q3",
        "max",
        "evaluations_per_run",
    ])?;
    for outcome in &report.methods {
        let s = outcome.summary;
        writer.write_record([
            outcome.label.clone(),
            format!("{}", s.min),
            format!("{}", s.q1),
            format!("{}", s.median),
            format!("{}", s.q3),
            format!("{}", s.max),
            outcome.trace.evaluations_per_run[0].to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes the candidate solutions with one named column per feature plus the
/// predicted objective value.
pub fn write_candidates_csv(
    report: &CampaignReport,
    feature_names: &[String],
    prediction_label: &str,
    path: &Path,
) -> Result<()> {
    let dim = report
        .candidates
        .first()
        .map(|c| c.x.len())
        .unwrap_or(feature_names.len());
    if feature_names.len() != dim {
        return Err(Error::DimensionMismatch {
            context: "candidate export feature names".into(),
            expected: dim,
            actual: feature_names.len(),
        });
    }
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = feature_names.to_vec();
    header.push(prediction_label.to_owned());
    writer.write_record(&header)?;
    for candidate in &report.candidates {
        let mut row: Vec<String> = candidate.x.iter().map(|v| format!("{v}")).collect();
        row.push(format!("{}", candidate.fitness));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn peak(x: &[f64]) -> f64 {
        -x.iter().map(|&v| (v - 0.5) * (v - 0.5)).sum::<f64>()
    }

    fn methods() -> Vec<MethodSpec> {
        vec![
            MethodSpec::Optimizer(OptimizerConfig::new(Algorithm::De, 10, 5, 0)),
            MethodSpec::UniformSearch { n: 60 },
        ]
    }

    fn unit_bounds() -> Bounds {
        Bounds::new(vec![0.0; 3], vec![1.0; 3]).unwrap()
    }

    #[test]
    fn quartiles_interpolate_linearly() {
        let s = FiveNumberSummary::from_values(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q3, 3.25);
        assert_eq!(s.max, 4.0);
    }

    #[test]
    fn campaign_aggregates_each_method() {
        let report = run_campaign(&peak, &unit_bounds(), &methods(), 3, 77).unwrap();
        assert_eq!(report.methods.len(), 2);

        let de = &report.methods[0];
        assert_eq!(de.label, "de");
        assert_eq!(de.trace.n_runs(), 3);
        assert_eq!(de.envelope.len(), 6);
        assert_eq!(de.trace.evaluations_per_run, vec![60, 60, 60]);

        let sampler = &report.methods[1];
        assert_eq!(sampler.label, "uniform");
        assert_eq!(sampler.envelope.len(), 1);
        assert_eq!(sampler.trace.final_populations[0].len(), SAMPLER_CANDIDATES);

        for outcome in &report.methods {
            let s = outcome.summary;
            assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
            for e in &outcome.envelope {
                assert!(e.min <= e.mean && e.mean <= e.max);
            }
        }

        let winner = &report.methods[report.best_method];
        let runner_up = &report.methods[1 - report.best_method];
        assert!(winner.summary.median >= runner_up.summary.median);
        assert!(!report.candidates.is_empty());
        for pair in report.candidates.windows(2) {
            assert!(pair[0].fitness >= pair[1].fitness);
        }
    }

    #[test]
    fn campaign_is_deterministic_for_a_seed() {
        let a = run_campaign(&peak, &unit_bounds(), &methods(), 4, 5).unwrap();
        let b = run_campaign(&peak, &unit_bounds(), &methods(), 4, 5).unwrap();
        for (ma, mb) in a.methods.iter().zip(&b.methods) {
            assert_eq!(ma.final_bests, mb.final_bests);
            assert_eq!(ma.trace.best_so_far, mb.trace.best_so_far);
        }
        assert_eq!(a.best_method, b.best_method);
        assert_eq!(a.candidates, b.candidates);
    }

    #[test]
    fn campaign_rejects_empty_or_zero_run_setups() {
        assert!(run_campaign(&peak, &unit_bounds(), &[], 3, 1).is_err());
        assert!(run_campaign(&peak, &unit_bounds(), &methods(), 0, 1).is_err());
    }

    #[test]
    fn csv_exports_are_stable_byte_for_byte() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_campaign(&peak, &unit_bounds(), &methods(), 2, 9).unwrap();
        let names: Vec<String> = (0..3).map(|j| format!("x{j}")).collect();

        let trace_path = dir.path().join("trace.csv");
        let summary_path = dir.path().join("summary.csv");
        let cand_path = dir.path().join("candidates.csv");
        write_trace_csv(&report.methods[0], &trace_path).unwrap();
        write_summary_csv(&report, &summary_path).unwrap();
        write_candidates_csv(&report, &names, "predicted", &cand_path).unwrap();

        let trace_text = std::fs::read_to_string(&trace_path).unwrap();
        assert!(trace_text.starts_with("run,generation,best_so_far\n"));
        assert_eq!(trace_text.lines().count(), 1 + 2 * 6);
        let summary_text = std::fs::read_to_string(&summary_path).unwrap();
        assert_eq!(summary_text.lines().count(), 3);
        let cand_text = std::fs::read_to_string(&cand_path).unwrap();
        assert!(cand_text.starts_with("x0,x1,x2,predicted\n"));

        let again = run_campaign(&peak, &unit_bounds(), &methods(), 2, 9).unwrap();
        let trace2 = dir.path().join("trace2.csv");
        write_trace_csv(&again.methods[0], &trace2).unwrap();
        assert_eq!(trace_text, std::fs::read_to_string(&trace2).unwrap());

        let wrong_names = vec!["only_one".to_owned()];
        assert!(write_candidates_csv(&report, &wrong_names, "p", &cand_path).is_err());
    }
}

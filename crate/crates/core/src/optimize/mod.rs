//! Bound-constrained maximization of black-box objectives.
//!
//! Three population-based optimizers (differential evolution, a generational
//! genetic algorithm, and particle swarm optimization) plus two space-filling
//! sampling baselines (uniform random and Latin hypercube), all sharing a
//! box-bounds domain, deterministic seeding, and best-so-far convergence
//! tracing. Every method maximizes natively; objectives are never negated
//! internally.

mod campaign;
mod methods;
mod sampling;

pub use campaign::{
    run_campaign, write_candidates_csv, write_summary_csv, write_trace_csv, CampaignReport,
    Envelope, FiveNumberSummary, MethodOutcome, MethodSpec,
};
pub use methods::{de_mutant, de_optimize, ga_optimize, pso_optimize, pso_step};
pub use sampling::{latin_hypercube_sample, uniform_sample, SampleBatch};

use ndarray::Array2;
use rand::Rng;

use crate::dataset::FeatureSpec;
use crate::error::{Error, Result};
use crate::seeding::{name_tag, rng_from};

/// Axis-aligned box constraints for the search space.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    /// Builds a box from explicit bound vectors. Both must have the same
    /// nonzero length, be finite, and satisfy `lower[j] <= upper[j]`.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::EmptyInput {
                context: "search bounds".into(),
            });
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                context: "search bounds".into(),
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        for j in 0..lower.len() {
            if !lower[j].is_finite() || !upper[j].is_finite() || lower[j] > upper[j] {
                return Err(Error::InvalidArgument(format!(
                    "bound {j} is invalid: [{}, {}]",
                    lower[j], upper[j]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Bounds taken from feature specifications, in order.
    pub fn from_features(features: &[FeatureSpec]) -> Result<Self> {
        Bounds::new(
            features.iter().map(|f| f.lower).collect(),
            features.iter().map(|f| f.upper).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Width of dimension `j`.
    pub fn span(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .enumerate()
                .all(|(j, &v)| v >= self.lower[j] && v <= self.upper[j])
    }

    /// Clamps each coordinate into the box.
    pub fn clip(&self, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[j], self.upper[j]);
        }
    }

    /// Folds each coordinate back into the box by reflecting off the violated
    /// face, repeatedly if the overshoot exceeds one box width.
    pub fn reflect(&self, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            let span = self.span(j);
            if span == 0.0 {
                *v = self.lower[j];
                continue;
            }
            let period = 2.0 * span;
            let mut offset = (*v - self.lower[j]).rem_euclid(period);
            if offset > span {
                offset = period - offset;
            }
            *v = self.lower[j] + offset;
        }
    }

    /// Applies the configured out-of-bounds repair.
    pub fn repair(&self, handling: BoundHandling, x: &mut [f64]) {
        match handling {
            BoundHandling::Clip => self.clip(x),
            BoundHandling::Reflect => self.reflect(x),
        }
    }
}

/// A candidate solution and its objective value.
///
/// `fitness` is NaN until the point has been evaluated; every optimizer
/// evaluates its population immediately after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub x: Vec<f64>,
    pub fitness: f64,
}

impl Individual {
    /// A candidate that has not been scored yet.
    pub fn unevaluated(x: Vec<f64>) -> Self {
        Self {
            x,
            fitness: f64::NAN,
        }
    }

    pub fn evaluated(x: Vec<f64>, fitness: f64) -> Self {
        Self { x, fitness }
    }
}

/// Which optimizer an [`OptimizerConfig`] drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    De,
    Ga,
    Pso,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::De => "de",
            Algorithm::Ga => "ga",
            Algorithm::Pso => "pso",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "de" => Ok(Algorithm::De),
            "ga" => Ok(Algorithm::Ga),
            "pso" => Ok(Algorithm::Pso),
            other => Err(Error::InvalidArgument(format!(
                "unknown optimizer '{other}' (expected de, ga, or pso)"
            ))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Base-vector choice for differential evolution mutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeStrategy {
    /// Mutate around a randomly chosen population member (DE/rand/1).
    #[default]
    RandOne,
    /// Mutate around the target vector itself (DE/target-base/1).
    TargetBase,
}

/// Differential evolution settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DeConfig {
    /// Differential weight applied to the donor difference vector.
    pub f: f64,
    /// Binomial crossover rate.
    pub cr: f64,
    pub strategy: DeStrategy,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            f: 0.5,
            cr: 0.7,
            strategy: DeStrategy::RandOne,
        }
    }
}

/// Genetic algorithm settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    /// Probability that a selected parent pair undergoes two-point crossover
    /// (otherwise the parents are copied unchanged).
    pub crossover_rate: f64,
    /// Per-gene probability of Gaussian mutation.
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of each dimension's range.
    pub sigma_fraction: f64,
    /// Number of contenders per tournament selection draw.
    pub tournament_size: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            crossover_rate: 0.7,
            mutation_rate: 0.2,
            sigma_fraction: 0.1,
            tournament_size: 3,
        }
    }
}

/// How PSO velocity limits are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityScale {
    /// Limits are fractions of each dimension's range, so a limit of 1 lets a
    /// particle cross the whole box in one step. This is the default because
    /// raw limits are meaningless across heterogeneously scaled features.
    #[default]
    FractionOfRange,
    /// Limits are used as-is in every dimension.
    Literal,
}

/// Particle swarm settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    /// Inertia weight.
    pub w: f64,
    /// Cognitive (personal-best) acceleration coefficient.
    pub c1: f64,
    /// Social (global-best) acceleration coefficient.
    pub c2: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub velocity_scale: VelocityScale,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            w: 0.729,
            c1: 2.0,
            c2: 2.0,
            v_min: -1.0,
            v_max: 1.0,
            velocity_scale: VelocityScale::FractionOfRange,
        }
    }
}

/// Out-of-bounds repair applied to every proposed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundHandling {
    #[default]
    Clip,
    Reflect,
}

/// Full configuration for one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub population: usize,
    pub generations: usize,
    pub de: DeConfig,
    pub ga: GaConfig,
    pub pso: PsoConfig,
    pub bound_handling: BoundHandling,
    pub seed: u64,
}

impl OptimizerConfig {
    /// A configuration with standard settings for the chosen algorithm.
    pub fn new(algorithm: Algorithm, population: usize, generations: usize, seed: u64) -> Self {
        Self {
            algorithm,
            population,
            generations,
            de: DeConfig::default(),
            ga: GaConfig::default(),
            pso: PsoConfig::default(),
            bound_handling: BoundHandling::default(),
            seed,
        }
    }

    /// Checks population sizes and rate ranges; every optimizer entry point
    /// calls this before touching the objective.
    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Err(Error::InvalidArgument(message));
        let min_population = match self.algorithm {
            // rand/1 needs three distinct members besides the target.
            Algorithm::De => 4,
            Algorithm::Ga => 2,
            Algorithm::Pso => 1,
        };
        if self.population < min_population {
            return invalid(format!(
                "{} needs a population of at least {min_population}, got {}",
                self.algorithm, self.population
            ));
        }
        if self.generations < 1 {
            return invalid("generations must be at least 1".into());
        }
        if !self.de.f.is_finite() || self.de.f <= 0.0 {
            return invalid(format!("differential weight must be > 0, got {}", self.de.f));
        }
        for (label, rate) in [
            ("de crossover rate", self.de.cr),
            ("ga crossover rate", self.ga.crossover_rate),
            ("ga mutation rate", self.ga.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return invalid(format!("{label} must lie in [0, 1], got {rate}"));
            }
        }
        if !self.ga.sigma_fraction.is_finite() || self.ga.sigma_fraction < 0.0 {
            return invalid(format!(
                "ga mutation sigma fraction must be >= 0, got {}",
                self.ga.sigma_fraction
            ));
        }
        if self.ga.tournament_size < 1 {
            return invalid("ga tournament size must be at least 1".into());
        }
        for (label, v) in [
            ("pso inertia", self.pso.w),
            ("pso cognitive coefficient", self.pso.c1),
            ("pso social coefficient", self.pso.c2),
        ] {
            if !v.is_finite() || v < 0.0 {
                return invalid(format!("{label} must be >= 0, got {v}"));
            }
        }
        if !self.pso.v_min.is_finite() || !self.pso.v_max.is_finite() || self.pso.v_min > self.pso.v_max
        {
            return invalid(format!(
                "pso velocity limits are invalid: [{}, {}]",
                self.pso.v_min, self.pso.v_max
            ));
        }
        Ok(())
    }
}

/// Record of a single optimizer or sampler run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    /// Best fitness seen up to each checkpoint; entry 0 is taken right after
    /// initialization, so optimizers produce `generations + 1` entries.
    pub best_so_far: Vec<f64>,
    /// The best individual encountered anywhere in the run.
    pub best: Individual,
    /// Total objective evaluations performed.
    pub evaluations: usize,
    /// The population at the final generation (for samplers, the top scoring
    /// samples), used for candidate-solution export.
    pub final_population: Vec<Individual>,
}

/// Aggregated best-so-far curves for repeated runs of one method.
#[derive(Debug, Clone)]
pub struct ConvergenceTrace {
    /// runs x checkpoints matrix of best-so-far fitness.
    pub best_so_far: Array2<f64>,
    /// Best individual of each run.
    pub run_bests: Vec<Individual>,
    /// Objective evaluations per run.
    pub evaluations_per_run: Vec<usize>,
    /// Final population of each run.
    pub final_populations: Vec<Vec<Individual>>,
}

impl ConvergenceTrace {
    /// Stacks per-run traces; all runs must share the same checkpoint count.
    pub fn from_runs(runs: Vec<RunTrace>) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::EmptyInput {
                context: "convergence trace".into(),
            });
        }
        let width = runs[0].best_so_far.len();
        let mut matrix = Array2::zeros((runs.len(), width));
        for (r, run) in runs.iter().enumerate() {
            if run.best_so_far.len() != width {
                return Err(Error::DimensionMismatch {
                    context: format!("trace length of run {r}"),
                    expected: width,
                    actual: run.best_so_far.len(),
                });
            }
            for (c, &v) in run.best_so_far.iter().enumerate() {
                matrix[[r, c]] = v;
            }
        }
        Ok(Self {
            best_so_far: matrix,
            run_bests: runs.iter().map(|r| r.best.clone()).collect(),
            evaluations_per_run: runs.iter().map(|r| r.evaluations).collect(),
            final_populations: runs.into_iter().map(|r| r.final_population).collect(),
        })
    }

    pub fn n_runs(&self) -> usize {
        self.best_so_far.nrows()
    }

    pub fn n_checkpoints(&self) -> usize {
        self.best_so_far.ncols()
    }

    /// True when every run's curve is non-decreasing.
    pub fn is_monotone(&self) -> bool {
        self.best_so_far
            .rows()
            .into_iter()
            .all(|row| row.iter().zip(row.iter().skip(1)).all(|(a, b)| a <= b))
    }

    /// Final best fitness of each run.
    pub fn final_bests(&self) -> Vec<f64> {
        self.best_so_far
            .rows()
            .into_iter()
            .map(|row| row[row.len() - 1])
            .collect()
    }
}

/// Draws `population` individuals coordinate-wise as
/// `lower + u * (upper - lower)` with `u ~ Uniform(0, 1)`.
///
/// Individuals come back unevaluated. The draw order is individual-major,
/// coordinate-minor, so the result depends only on `seed`.
pub fn initialize_population(
    bounds: &Bounds,
    population: usize,
    seed: u64,
) -> Result<Vec<Individual>> {
    if population < 1 {
        return Err(Error::InvalidArgument(
            "population must be at least 1".into(),
        ));
    }
    let mut rng = rng_from(seed, &[name_tag("init_population")]);
    let d = bounds.dim();
    Ok((0..population)
        .map(|_| {
            let x: Vec<f64> = (0..d)
                .map(|j| bounds.lower[j] + rng.gen::<f64>() * bounds.span(j))
                .collect();
            Individual::unevaluated(x)
        })
        .collect())
}

/// Index of the highest fitness, first occurrence on ties.
pub(crate) fn argmax_fitness(population: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in population.iter().enumerate().skip(1) {
        if ind.fitness > population[best].fitness {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_validate_shape_and_order() {
        assert!(Bounds::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![2.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![], vec![]).is_err());
        assert!(Bounds::new(vec![1.0], vec![1.0]).is_ok());
    }

    #[test]
    fn reflection_folds_back_into_the_box() {
        let bounds = Bounds::new(vec![0.0], vec![2.0]).unwrap();
        for (start, expect) in [(2.5, 1.5), (-0.5, 0.5), (6.5, 1.5), (-4.5, 0.5), (1.0, 1.0)] {
            let mut x = [start];
            bounds.reflect(&mut x);
            assert!((x[0] - expect).abs() < 1e-12, "{start} -> {}", x[0]);
        }
    }

    #[test]
    fn degenerate_box_initializes_to_the_point() {
        let bounds = Bounds::new(vec![3.0, -1.0], vec![3.0, -1.0]).unwrap();
        for ind in initialize_population(&bounds, 8, 5).unwrap() {
            assert_eq!(ind.x, vec![3.0, -1.0]);
            assert!(ind.fitness.is_nan());
        }
    }

    #[test]
    fn initialization_stays_in_bounds_and_is_seed_deterministic() {
        let mut rng = rng_from(99, &[0]);
        for trial in 0..50 {
            let d = 1 + (trial % 7);
            let lower: Vec<f64> = (0..d).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let upper: Vec<f64> = lower.iter().map(|&l| l + rng.gen_range(0.0..50.0)).collect();
            let bounds = Bounds::new(lower, upper).unwrap();
            let pop = initialize_population(&bounds, 40, trial as u64).unwrap();
            for ind in &pop {
                assert!(bounds.contains(&ind.x));
            }
            let again = initialize_population(&bounds, 40, trial as u64).unwrap();
            // Compare coordinates only: fitness is still NaN at this point.
            for (a, b) in pop.iter().zip(&again) {
                assert_eq!(a.x, b.x);
            }
        }
    }

    #[test]
    fn config_validation_catches_bad_settings() {
        let ok = OptimizerConfig::new(Algorithm::De, 25, 50, 1);
        assert!(ok.validate().is_ok());

        let mut small = ok.clone();
        small.population = 3;
        assert!(small.validate().is_err());

        let mut pso_one = OptimizerConfig::new(Algorithm::Pso, 1, 10, 1);
        assert!(pso_one.validate().is_ok());
        pso_one.pso.v_min = 2.0;
        assert!(pso_one.validate().is_err());

        let mut bad_cr = ok.clone();
        bad_cr.de.cr = 1.5;
        assert!(bad_cr.validate().is_err());

        let mut bad_f = ok.clone();
        bad_f.de.f = 0.0;
        assert!(bad_f.validate().is_err());

        let mut bad_rate = OptimizerConfig::new(Algorithm::Ga, 10, 5, 1);
        bad_rate.ga.mutation_rate = -0.1;
        assert!(bad_rate.validate().is_err());
    }

    #[test]
    fn trace_reports_monotonicity_and_finals() {
        let runs = vec![
            RunTrace {
                best_so_far: vec![1.0, 2.0, 2.0],
                best: Individual::evaluated(vec![0.0], 2.0),
                evaluations: 30,
                final_population: vec![],
            },
            RunTrace {
                best_so_far: vec![0.5, 0.75, 3.0],
                best: Individual::evaluated(vec![0.0], 3.0),
                evaluations: 30,
                final_population: vec![],
            },
        ];
        let trace = ConvergenceTrace::from_runs(runs).unwrap();
        assert!(trace.is_monotone());
        assert_eq!(trace.final_bests(), vec![2.0, 3.0]);
        assert_eq!(trace.n_runs(), 2);
        assert_eq!(trace.n_checkpoints(), 3);
    }
}

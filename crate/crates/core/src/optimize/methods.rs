//! Differential evolution, genetic algorithm, and particle swarm optimizers.
//!
//! All three share the same shape: initialize a population inside the box,
//! evaluate it, then iterate for a fixed number of generations while
//! recording the best-so-far fitness after every generation. Random draws
//! follow a fixed order (individual-major, coordinate-minor), so a run is a
//! pure function of its configuration.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{
    argmax_fitness, initialize_population, Algorithm, Bounds, DeStrategy, Individual,
    OptimizerConfig, RunTrace, VelocityScale,
};
use crate::error::{Error, Result};
use crate::seeding::{name_tag, rng_from};

/// Differential-evolution mutant vector: `base + weight * (donor_a - donor_b)`.
pub fn de_mutant(base: &[f64], donor_a: &[f64], donor_b: &[f64], weight: f64) -> Vec<f64> {
    base.iter()
        .zip(donor_a.iter().zip(donor_b))
        .map(|(&b, (&a, &c))| b + weight * (a - c))
        .collect()
}

/// Raw particle-swarm velocity update for one coordinate:
/// `w*v + c1*r1*(personal - x) + c2*r2*(global - x)`. Callers clamp the
/// result to the velocity limits afterwards.
#[allow(clippy::too_many_arguments)]
pub fn pso_step(
    velocity: f64,
    x: f64,
    personal: f64,
    global: f64,
    w: f64,
    c1: f64,
    c2: f64,
    r1: f64,
    r2: f64,
) -> f64 {
    w * velocity + c1 * r1 * (personal - x) + c2 * r2 * (global - x)
}

fn check_algorithm(config: &OptimizerConfig, expected: Algorithm) -> Result<()> {
    config.validate()?;
    if config.algorithm != expected {
        return Err(Error::InvalidArgument(format!(
            "configuration targets '{}' but the {} optimizer was invoked",
            config.algorithm, expected
        )));
    }
    Ok(())
}

fn evaluate<F: Fn(&[f64]) -> f64>(objective: &F, x: &[f64]) -> f64 {
    let fitness = objective(x);
    assert!(
        fitness.is_finite(),
        "objective returned a non-finite value at {x:?}"
    );
    fitness
}

/// `count` distinct indices in `0..n`, all different from `exclude`.
fn distinct_indices(rng: &mut ChaCha8Rng, n: usize, exclude: usize, count: usize) -> Vec<usize> {
    let mut picks = Vec::with_capacity(count);
    while picks.len() < count {
        let candidate = rng.gen_range(0..n);
        if candidate != exclude && !picks.contains(&candidate) {
            picks.push(candidate);
        }
    }
    picks
}

/// Binomial crossover with a guaranteed donor coordinate at `j_rand`.
pub(crate) fn binomial_cross(
    rng: &mut ChaCha8Rng,
    mutant: &[f64],
    target: &[f64],
    cr: f64,
) -> Vec<f64> {
    let d = mutant.len();
    let j_rand = rng.gen_range(0..d);
    (0..d)
        .map(|j| {
            let cross = rng.gen::<f64>() < cr;
            if cross || j == j_rand {
                mutant[j]
            } else {
                target[j]
            }
        })
        .collect()
}

/// Maximizes `objective` with DE/rand/1/bin (or the target-base variant).
///
/// Greedy selection is synchronous: donors come from the generation's
/// starting population and replacements take effect at the generation
/// boundary. A trial whose fitness ties the target replaces it, which lets
/// the population drift across plateaus.
pub fn de_optimize<F>(objective: &F, bounds: &Bounds, config: &OptimizerConfig) -> Result<RunTrace>
where
    F: Fn(&[f64]) -> f64,
{
    check_algorithm(config, Algorithm::De)?;
    let n = config.population;

    let mut pop = initialize_population(bounds, n, config.seed)?;
    for ind in &mut pop {
        ind.fitness = evaluate(objective, &ind.x);
    }
    let mut evaluations = n;
    let mut best = pop[argmax_fitness(&pop)].clone();
    let mut best_so_far = Vec::with_capacity(config.generations + 1);
    best_so_far.push(best.fitness);

    let mut rng = rng_from(config.seed, &[name_tag("de_steps")]);
    for _ in 0..config.generations {
        let snapshot = pop.clone();
        for i in 0..n {
            let mutant = match config.de.strategy {
                DeStrategy::RandOne => {
                    let picks = distinct_indices(&mut rng, n, i, 3);
                    de_mutant(
                        &snapshot[picks[2]].x,
                        &snapshot[picks[0]].x,
                        &snapshot[picks[1]].x,
                        config.de.f,
                    )
                }
                DeStrategy::TargetBase => {
                    let picks = distinct_indices(&mut rng, n, i, 2);
                    de_mutant(
                        &snapshot[i].x,
                        &snapshot[picks[0]].x,
                        &snapshot[picks[1]].x,
                        config.de.f,
                    )
                }
            };
            let mut trial = binomial_cross(&mut rng, &mutant, &snapshot[i].x, config.de.cr);
            bounds.repair(config.bound_handling, &mut trial);
            debug_assert!(bounds.contains(&trial));
            let fitness = evaluate(objective, &trial);
            evaluations += 1;
            if fitness >= snapshot[i].fitness {
                pop[i] = Individual::evaluated(trial, fitness);
                if fitness > best.fitness {
                    best = pop[i].clone();
                }
            }
        }
        best_so_far.push(best.fitness);
    }

    Ok(RunTrace {
        best_so_far,
        best,
        evaluations,
        final_population: pop,
    })
}

/// Index won by a `size`-way tournament with replacement; higher fitness
/// wins, first-drawn wins ties.
fn tournament(rng: &mut ChaCha8Rng, pop: &[Individual], size: usize) -> usize {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..size {
        let challenger = rng.gen_range(0..pop.len());
        if pop[challenger].fitness > pop[best].fitness {
            best = challenger;
        }
    }
    best
}

/// Two-point crossover over cut positions drawn from the `d + 1` gene
/// boundaries. At every locus the two children carry exactly the parents'
/// value pair.
pub(crate) fn two_point_crossover(
    rng: &mut ChaCha8Rng,
    a: &[f64],
    b: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let d = a.len();
    let first = rng.gen_range(0..=d);
    let mut second = rng.gen_range(0..=d);
    while second == first {
        second = rng.gen_range(0..=d);
    }
    let (p, q) = (first.min(second), first.max(second));
    let mut child_a = a.to_vec();
    let mut child_b = b.to_vec();
    child_a[p..q].copy_from_slice(&b[p..q]);
    child_b[p..q].copy_from_slice(&a[p..q]);
    (child_a, child_b)
}

/// Per-gene Gaussian mutation with standard deviation
/// `sigma_fraction * span(j)`.
fn gaussian_mutate(
    rng: &mut ChaCha8Rng,
    x: &mut [f64],
    bounds: &Bounds,
    rate: f64,
    sigma_fraction: f64,
) {
    for (j, v) in x.iter_mut().enumerate() {
        let hit = rng.gen::<f64>() < rate;
        if hit {
            let noise: f64 = rng.sample(StandardNormal);
            *v += sigma_fraction * bounds.span(j) * noise;
        }
    }
}

/// Maximizes `objective` with a generational genetic algorithm.
///
/// Tournament selection picks parent pairs; two-point crossover fires with
/// probability `crossover_rate` (otherwise the parents are copied); children
/// get per-gene Gaussian mutation and are repaired into the box. A full
/// population of children is evaluated each generation, then the incumbent
/// best replaces the weakest child unless a child already matches it, so the
/// best fitness never decreases while the evaluation count stays at
/// `population` per generation.
pub fn ga_optimize<F>(objective: &F, bounds: &Bounds, config: &OptimizerConfig) -> Result<RunTrace>
where
    F: Fn(&[f64]) -> f64,
{
    check_algorithm(config, Algorithm::Ga)?;
    let n = config.population;

    let mut pop = initialize_population(bounds, n, config.seed)?;
    for ind in &mut pop {
        ind.fitness = evaluate(objective, &ind.x);
    }
    let mut evaluations = n;
    let mut best = pop[argmax_fitness(&pop)].clone();
    let mut best_so_far = Vec::with_capacity(config.generations + 1);
    best_so_far.push(best.fitness);

    let mut rng = rng_from(config.seed, &[name_tag("ga_steps")]);
    for _ in 0..config.generations {
        let incumbent = pop[argmax_fitness(&pop)].clone();

        let mut children: Vec<Vec<f64>> = Vec::with_capacity(n);
        while children.len() < n {
            let pa = tournament(&mut rng, &pop, config.ga.tournament_size);
            let pb = tournament(&mut rng, &pop, config.ga.tournament_size);
            let crossed = rng.gen::<f64>() < config.ga.crossover_rate;
            let (mut ca, mut cb) = if crossed {
                two_point_crossover(&mut rng, &pop[pa].x, &pop[pb].x)
            } else {
                (pop[pa].x.clone(), pop[pb].x.clone())
            };
            gaussian_mutate(
                &mut rng,
                &mut ca,
                bounds,
                config.ga.mutation_rate,
                config.ga.sigma_fraction,
            );
            gaussian_mutate(
                &mut rng,
                &mut cb,
                bounds,
                config.ga.mutation_rate,
                config.ga.sigma_fraction,
            );
            bounds.repair(config.bound_handling, &mut ca);
            bounds.repair(config.bound_handling, &mut cb);
            debug_assert!(bounds.contains(&ca) && bounds.contains(&cb));
            children.push(ca);
            if children.len() < n {
                children.push(cb);
            }
        }

        let mut next: Vec<Individual> = children
            .into_iter()
            .map(|x| {
                let fitness = evaluate(objective, &x);
                evaluations += 1;
                Individual::evaluated(x, fitness)
            })
            .collect();

        if next[argmax_fitness(&next)].fitness < incumbent.fitness {
            let mut worst = 0;
            for (i, ind) in next.iter().enumerate().skip(1) {
                if ind.fitness < next[worst].fitness {
                    worst = i;
                }
            }
            next[worst] = incumbent;
        }
        pop = next;

        let gen_best = argmax_fitness(&pop);
        if pop[gen_best].fitness > best.fitness {
            best = pop[gen_best].clone();
        }
        best_so_far.push(best.fitness);
    }

    Ok(RunTrace {
        best_so_far,
        best,
        evaluations,
        final_population: pop,
    })
}

/// Maximizes `objective` with global-best particle swarm optimization.
///
/// Velocities start at zero; each step draws fresh per-coordinate `r1`, `r2`,
/// clamps the velocity to the configured limits (by default expressed as
/// fractions of each dimension's range), moves the particle, repairs it into
/// the box, and updates personal and global bests on strict improvement.
pub fn pso_optimize<F>(objective: &F, bounds: &Bounds, config: &OptimizerConfig) -> Result<RunTrace>
where
    F: Fn(&[f64]) -> f64,
{
    check_algorithm(config, Algorithm::Pso)?;
    let n = config.population;
    let d = bounds.dim();

    let mut pop = initialize_population(bounds, n, config.seed)?;
    for ind in &mut pop {
        ind.fitness = evaluate(objective, &ind.x);
    }
    let mut evaluations = n;
    let mut personal = pop.clone();
    let mut global = pop[argmax_fitness(&pop)].clone();
    let mut best_so_far = Vec::with_capacity(config.generations + 1);
    best_so_far.push(global.fitness);

    let limits: Vec<(f64, f64)> = (0..d)
        .map(|j| {
            let scale = match config.pso.velocity_scale {
                VelocityScale::FractionOfRange => bounds.span(j),
                VelocityScale::Literal => 1.0,
            };
            (config.pso.v_min * scale, config.pso.v_max * scale)
        })
        .collect();

    let mut velocities = vec![vec![0.0; d]; n];
    let mut rng = rng_from(config.seed, &[name_tag("pso_steps")]);
    for _ in 0..config.generations {
        for i in 0..n {
            for j in 0..d {
                let r1 = rng.gen::<f64>();
                let r2 = rng.gen::<f64>();
                let raw = pso_step(
                    velocities[i][j],
                    pop[i].x[j],
                    personal[i].x[j],
                    global.x[j],
                    config.pso.w,
                    config.pso.c1,
                    config.pso.c2,
                    r1,
                    r2,
                );
                velocities[i][j] = raw.clamp(limits[j].0, limits[j].1);
                pop[i].x[j] += velocities[i][j];
            }
            bounds.repair(config.bound_handling, &mut pop[i].x);
            debug_assert!(bounds.contains(&pop[i].x));
            pop[i].fitness = evaluate(objective, &pop[i].x);
            evaluations += 1;
            if pop[i].fitness > personal[i].fitness {
                personal[i] = pop[i].clone();
            }
            if pop[i].fitness > global.fitness {
                global = pop[i].clone();
            }
        }
        best_so_far.push(global.fitness);
    }

    Ok(RunTrace {
        best_so_far,
        best: global,
        evaluations,
        final_population: pop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::BoundHandling;

    fn sphere_peak(x: &[f64]) -> f64 {
        -x.iter().map(|&v| (v - 0.3) * (v - 0.3)).sum::<f64>()
    }

    fn unit_box(d: usize) -> Bounds {
        Bounds::new(vec![0.0; d], vec![1.0; d]).unwrap()
    }

    #[test]
    fn mutant_matches_hand_arithmetic() {
        let v = de_mutant(&[1.0, 1.0], &[2.0, 0.0], &[0.0, 1.0], 0.5);
        assert_eq!(v, vec![2.0, 0.5]);
    }

    #[test]
    fn velocity_step_matches_hand_arithmetic() {
        let raw = pso_step(1.0, 0.0, 2.0, 4.0, 0.5, 2.0, 2.0, 0.5, 0.5);
        assert_eq!(raw, 6.5);
        let clipped = raw.clamp(-1.0, 1.0);
        assert_eq!(clipped, 1.0);
        assert_eq!(0.0 + clipped, 1.0);
    }

    #[test]
    fn full_crossover_copies_the_mutant_and_zero_keeps_one_donor_gene() {
        let mut rng = rng_from(5, &[0]);
        let mutant = vec![1.0, 2.0, 3.0, 4.0];
        let target = vec![-1.0, -2.0, -3.0, -4.0];
        let full = binomial_cross(&mut rng, &mutant, &target, 1.0);
        assert_eq!(full, mutant);

        let none = binomial_cross(&mut rng, &mutant, &target, 0.0);
        let donor_genes = none.iter().zip(&mutant).filter(|(a, b)| a == b).count();
        assert_eq!(donor_genes, 1, "exactly the forced coordinate crosses");
    }

    #[test]
    fn crossover_children_carry_the_parent_multiset_at_every_locus() {
        let mut rng = rng_from(6, &[0]);
        let a: Vec<f64> = (0..8).map(f64::from).collect();
        let b: Vec<f64> = (0..8).map(|i| f64::from(i) + 100.0).collect();
        for _ in 0..50 {
            let (ca, cb) = two_point_crossover(&mut rng, &a, &b);
            for j in 0..8 {
                let mut got = [ca[j], cb[j]];
                let mut want = [a[j], b[j]];
                got.sort_by(f64::total_cmp);
                want.sort_by(f64::total_cmp);
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn zero_sigma_mutation_is_the_identity() {
        let bounds = unit_box(5);
        let mut rng = rng_from(7, &[0]);
        let mut x = vec![0.2, 0.4, 0.6, 0.8, 1.0];
        let before = x.clone();
        gaussian_mutate(&mut rng, &mut x, &bounds, 1.0, 0.0);
        assert_eq!(x, before);
    }

    #[test]
    fn optimizers_improve_and_trace_deterministically() {
        let bounds = unit_box(5);
        for algorithm in [Algorithm::De, Algorithm::Ga, Algorithm::Pso] {
            let config = OptimizerConfig::new(algorithm, 20, 30, 42);
            let run = |cfg: &OptimizerConfig| match algorithm {
                Algorithm::De => de_optimize(&sphere_peak, &bounds, cfg).unwrap(),
                Algorithm::Ga => ga_optimize(&sphere_peak, &bounds, cfg).unwrap(),
                Algorithm::Pso => pso_optimize(&sphere_peak, &bounds, cfg).unwrap(),
            };
            let trace = run(&config);
            assert_eq!(trace.best_so_far.len(), 31, "{algorithm}");
            assert_eq!(trace.evaluations, 20 * 31, "{algorithm}");
            assert!(
                trace.best_so_far.windows(2).all(|w| w[0] <= w[1]),
                "{algorithm} trace must be non-decreasing"
            );
            assert!(
                trace.best_so_far[30] > trace.best_so_far[0],
                "{algorithm} must improve on the initial population"
            );
            assert!(trace.best.fitness > -0.05, "{algorithm} should near the peak");
            assert!(bounds.contains(&trace.best.x));
            assert_eq!(trace.final_population.len(), 20);

            let again = run(&config);
            assert_eq!(trace.best_so_far, again.best_so_far, "{algorithm}");
            assert_eq!(trace.best, again.best, "{algorithm}");
        }
    }

    #[test]
    fn reflection_handling_keeps_iterates_feasible() {
        let bounds = Bounds::new(vec![-2.0; 3], vec![2.0; 3]).unwrap();
        let mut config = OptimizerConfig::new(Algorithm::De, 12, 15, 9);
        config.bound_handling = BoundHandling::Reflect;
        let trace = de_optimize(&sphere_peak, &bounds, &config).unwrap();
        for ind in &trace.final_population {
            assert!(bounds.contains(&ind.x));
        }
    }

    #[test]
    fn config_and_optimizer_must_agree() {
        let bounds = unit_box(2);
        let config = OptimizerConfig::new(Algorithm::De, 10, 5, 1);
        assert!(ga_optimize(&sphere_peak, &bounds, &config).is_err());
        assert!(pso_optimize(&sphere_peak, &bounds, &config).is_err());
        assert!(de_optimize(&sphere_peak, &bounds, &config).is_ok());
    }
}

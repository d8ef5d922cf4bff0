//! One-shot sampling baselines: uniform random search and Latin hypercube.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{argmax_fitness, Bounds, Individual};
use crate::error::{Error, Result};
use crate::seeding::{name_tag, rng_from};

/// An evaluated batch of samples and its best member.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub best: Individual,
    pub samples: Vec<Individual>,
}

fn evaluate_batch<F>(objective: &F, points: Vec<Vec<f64>>) -> SampleBatch
where
    F: Fn(&[f64]) -> f64,
{
    let samples: Vec<Individual> = points
        .into_iter()
        .map(|x| {
            let fitness = objective(&x);
            assert!(
                fitness.is_finite(),
                "objective returned a non-finite value at {x:?}"
            );
            Individual::evaluated(x, fitness)
        })
        .collect();
    let best = samples[argmax_fitness(&samples)].clone();
    SampleBatch { best, samples }
}

/// Evaluates `n` independent box-uniform points and returns the maximizer
/// along with every sample.
pub fn uniform_sample<F>(objective: &F, bounds: &Bounds, n: usize, seed: u64) -> Result<SampleBatch>
where
    F: Fn(&[f64]) -> f64,
{
    if n < 1 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let mut rng = rng_from(seed, &[name_tag("uniform_sample")]);
    let d = bounds.dim();
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..d)
                .map(|j| bounds.lower[j] + rng.gen::<f64>() * bounds.span(j))
                .collect()
        })
        .collect();
    Ok(evaluate_batch(objective, points))
}

/// Evaluates an `n`-point Latin hypercube design and returns the maximizer
/// along with every sample.
///
/// Each dimension is cut into `n` equal strata; an independent random
/// permutation assigns one sample per stratum, jittered uniformly inside it.
/// The jitter is kept a hair away from the stratum edges so that
/// `floor(n * (x - lower) / span)` recovers the stratum index exactly despite
/// floating-point rounding.
pub fn latin_hypercube_sample<F>(
    objective: &F,
    bounds: &Bounds,
    n: usize,
    seed: u64,
) -> Result<SampleBatch>
where
    F: Fn(&[f64]) -> f64,
{
    if n < 1 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let mut rng = rng_from(seed, &[name_tag("latin_hypercube")]);
    let d = bounds.dim();

    let mut points = vec![vec![0.0; d]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..d {
        strata.shuffle(&mut rng);
        for (i, point) in points.iter_mut().enumerate() {
            let jitter = rng.gen::<f64>().clamp(1e-9, 1.0 - 1e-9);
            let u = (strata[i] as f64 + jitter) / n as f64;
            point[j] = bounds.lower[j] + u * bounds.span(j);
        }
    }
    Ok(evaluate_batch(objective, points))
}

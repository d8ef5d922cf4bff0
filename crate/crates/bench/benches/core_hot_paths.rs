//! Benchmarks over the toolkit's hot paths: metric evaluation, outlier
//! scoring, tree and boosted training, surrogate prediction, and a
//! differential-evolution run on an analytic objective.
//!
//! Sizes are chosen so a full `cargo bench` finishes in minutes while still
//! exercising the same code the pipeline runs at scale.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use millopt_core::dataset::synthetic::generate_synthetic_mill;
use millopt_core::metrics::compute_metrics;
use millopt_core::models::{fit, RegressorSpec};
use millopt_core::optimize::{de_optimize, Algorithm, Bounds, OptimizerConfig};
use millopt_core::preprocess::lof_scores;

fn metrics_report(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let actual: Vec<f64> = (0..10_000).map(|_| rng.gen_range(1.0..100.0)).collect();
    let predicted: Vec<f64> = actual
        .iter()
        .map(|a| a + rng.gen_range(-5.0..5.0))
        .collect();
    c.bench_function("metrics_report_10k_points", |b| {
        b.iter(|| compute_metrics(black_box(&predicted), black_box(&actual)).unwrap())
    });
}

fn outlier_scores(c: &mut Criterion) {
    let data = generate_synthetic_mill(1_000, 5, 30.0).unwrap();
    c.bench_function("lof_scores_1k_rows_k10", |b| {
        b.iter(|| lof_scores(black_box(&data), 10).unwrap())
    });
}

fn tree_training(c: &mut Criterion) {
    let data = generate_synthetic_mill(2_000, 5, 30.0).unwrap();
    let spec = RegressorSpec::new("cart").unwrap().with_seed(7);
    c.bench_function("cart_fit_2k_rows", |b| {
        b.iter(|| fit(black_box(&spec), black_box(&data)).unwrap())
    });
}

fn boosted_training(c: &mut Criterion) {
    let data = generate_synthetic_mill(1_000, 5, 30.0).unwrap();
    let spec = RegressorSpec::new("gbm").unwrap().with_seed(7);
    c.bench_function("gbm_fit_1k_rows", |b| {
        b.iter(|| fit(black_box(&spec), black_box(&data)).unwrap())
    });
}

fn surrogate_prediction(c: &mut Criterion) {
    let data = generate_synthetic_mill(2_000, 5, 30.0).unwrap();
    let spec = RegressorSpec::new("random_forest").unwrap().with_seed(7);
    let model = fit(&spec, &data).unwrap();
    let row: Vec<f64> = data
        .schema
        .features
        .iter()
        .map(|f| 0.5 * (f.lower + f.upper))
        .collect();
    c.bench_function("forest_predict_row", |b| {
        b.iter(|| model.predict_row(black_box(&row)).unwrap())
    });
}

fn differential_evolution(c: &mut Criterion) {
    let bounds = Bounds::new(vec![-5.0; 15], vec![5.0; 15]).unwrap();
    let objective = |x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>();
    let config = OptimizerConfig::new(Algorithm::De, 25, 50, 7);
    c.bench_function("de_sphere_15d_pop25_gen50", |b| {
        b.iter(|| de_optimize(black_box(&objective), &bounds, &config).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = metrics_report,
        outlier_scores,
        tree_training,
        boosted_training,
        surrogate_prediction,
        differential_evolution
}
criterion_main!(benches);

//! Core library for surrogate-based optimization of mill process parameters.
//!
//! The crate covers the full path from raw plant records to recommended
//! operating points:
//!
//! 1. [`dataset`] — typed column schemas, CSV ingestion, rule-based cleaning,
//!    fold assignment, descriptive statistics, and a synthetic generator with
//!    a known ground-truth response for end-to-end validation.
//! 2. [`metrics`] — regression quality measures, cross-validation fold
//!    summaries, and rank-based model comparison (Friedman ranks plus paired
//!    t-tests).
//! 3. [`models`] — a roster of regression families implemented from first
//!    principles: linear solvers, k-nearest neighbours, decision trees, and
//!    four gradient-boosting variants among other ensembles. Fitted models
//!    serialize to a versioned text format.
//! 4. [`preprocess`] — local-outlier-factor scoring and recursive feature
//!    elimination driven by permutation importance.
//! 5. [`optimize`] — differential evolution, a genetic algorithm, and
//!    particle-swarm optimization over box-constrained spaces, with uniform
//!    and Latin-hypercube sampling baselines and a multi-run campaign runner.
//!
//! Every randomized routine takes an explicit seed and derives independent
//! sub-streams from it, so results are reproducible bit-for-bit regardless
//! of thread count.
//!
//! ```
//! use millopt_core::dataset::synthetic::generate_synthetic_mill;
//! use millopt_core::models::{fit, RegressorSpec};
//!
//! let data = generate_synthetic_mill(200, 7, 0.0).unwrap();
//! let spec = RegressorSpec::new("cart").unwrap();
//! let model = fit(&spec, &data).unwrap();
//! let preds = model.predict_rows(&data.rows.view()).unwrap();
//! assert_eq!(preds.len(), 200);
//! ```

pub mod cv;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod models;
pub mod optimize;
pub mod preprocess;
pub mod seeding;

pub use dataset::{Dataset, FeatureSpec, Schema};
pub use error::{Error, Result};
pub use metrics::{FoldSummary, MetricReport, RankReport};
pub use models::{FittedModel, RegressorSpec};
pub use optimize::{Bounds, ConvergenceTrace, Individual, OptimizerConfig};



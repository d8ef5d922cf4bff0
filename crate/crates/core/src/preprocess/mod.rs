//! Data preprocessing studies: density-based outlier scoring and
//! model-driven recursive feature elimination.

mod lof;
mod rfe;

pub use lof::{lof_scores, remove_outliers, LofResult};
pub use rfe::{rfe, rfe_sweep, rfe_with, RfeOptions, RfeResult};

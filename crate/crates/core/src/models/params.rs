//! Hyperparameter registry: per-family keys, ranges, and defaults.
//!
//! Every tunable is declared here once; [`RegressorSpec`](super::RegressorSpec)
//! validates keys and values against these tables, so unknown keys and
//! out-of-range values fail fast with the offending family and key named.

use super::Family;

#[derive(Debug, Clone, Copy)]
pub enum ParamKind {
    /// Numeric value in `[min, max]`; use infinities for open ends.
    Real { min: f64, max: f64 },
    /// Numeric value that must be a non-negative integer in `[min, max]`.
    Integer { min: u64, max: u64 },
    /// Boolean flag encoded as 0 or 1.
    Flag,
    /// One of a fixed set of tokens.
    Choice { options: &'static [&'static str] },
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: ParamKind,
    pub default: ParamDefault,
    pub doc: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub enum ParamDefault {
    Real(f64),
    Text(&'static str),
}

const POS: f64 = f64::INFINITY;

const LASSO: &[ParamSpec] = &[
    ParamSpec {
        key: "lambda",
        kind: ParamKind::Real { min: 0.0, max: POS },
        default: ParamDefault::Real(1.0),
        doc: "L1 penalty strength",
    },
    ParamSpec {
        key: "tol",
        kind: ParamKind::Real { min: 0.0, max: POS },
        default: ParamDefault::Real(1e-10),
        doc: "coordinate-descent stop: largest weight change per sweep",
    },
    ParamSpec {
        key: "max_cycles",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(10_000.0),
        doc: "maximum coordinate-descent sweeps",
    },
];

const ELASTIC_NET: &[ParamSpec] = &[
    ParamSpec {
        key: "lambda1",
        kind: ParamKind::Real { min: 0.0, max: POS },
        default: ParamDefault::Real(1.0),
        doc: "L1 penalty strength",
    },
    ParamSpec {
        key: "lambda2",
        kind: ParamKind::Real { min: 0.0, max: POS },
        default: ParamDefault::Real(1.0),
        doc: "L2 penalty strength",
    },
    ParamSpec {
        key: "tol",
        kind: ParamKind::Real { min: 0.0, max: POS },
        default: ParamDefault::Real(1e-10),
        doc: "coordinate-descent stop: largest weight change per sweep",
    },
    ParamSpec {
        key: "max_cycles",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(10_000.0),
        doc: "maximum coordinate-descent sweeps",
    },
];

const SGD: &[ParamSpec] = &[
    ParamSpec {
        key: "learning_rate",
        kind: ParamKind::Real { min: 1e-12, max: POS },
        default: ParamDefault::Real(0.01),
        doc: "per-sample step size on standardized features",
    },
    ParamSpec {
        key: "epochs",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(50.0),
        doc: "full shuffled passes over the training rows",
    },
];

const KNN: &[ParamSpec] = &[
    ParamSpec {
        key: "k",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(5.0),
        doc: "number of neighbours",
    },
    ParamSpec {
        key: "weighting",
        kind: ParamKind::Choice {
            options: &["uniform", "inverse_distance"],
        },
        default: ParamDefault::Text("uniform"),
        doc: "neighbour vote weighting",
    },
];

const CART: &[ParamSpec] = &[
    ParamSpec {
        key: "max_depth",
        kind: ParamKind::Integer { min: 0, max: 64 },
        default: ParamDefault::Real(6.0),
        doc: "maximum tree depth; 0 grows a single leaf",
    },
    ParamSpec {
        key: "min_samples_leaf",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(1.0),
        doc: "smallest admissible leaf size",
    },
    ParamSpec {
        key: "ccp_alpha",
        kind: ParamKind::Real { min: 0.0, max: POS },
        default: ParamDefault::Real(0.0),
        doc: "cost-complexity pruning strength; 0 disables pruning",
    },
];

const RANDOM_FOREST: &[ParamSpec] = &[
    ParamSpec {
        key: "n_trees",
        kind: ParamKind::Integer { min: 1, max: 100_000 },
        default: ParamDefault::Real(100.0),
        doc: "ensemble size",
    },
    ParamSpec {
        key: "max_depth",
        kind: ParamKind::Integer { min: 0, max: 64 },
        default: ParamDefault::Real(12.0),
        doc: "maximum depth per tree",
    },
    ParamSpec {
        key: "min_samples_leaf",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(1.0),
        doc: "smallest admissible leaf size",
    },
    ParamSpec {
        key: "max_features",
        kind: ParamKind::Integer { min: 0, max: 1_000_000 },
        default: ParamDefault::Real(0.0),
        doc: "features examined per split; 0 means ceil(d / 3)",
    },
    ParamSpec {
        key: "bootstrap",
        kind: ParamKind::Flag,
        default: ParamDefault::Real(1.0),
        doc: "resample rows with replacement per tree",
    },
];

const EXTRA_TREES: &[ParamSpec] = &[
    ParamSpec {
        key: "n_trees",
        kind: ParamKind::Integer { min: 1, max: 100_000 },
        default: ParamDefault::Real(100.0),
        doc: "ensemble size",
    },
    ParamSpec {
        key: "max_depth",
        kind: ParamKind::Integer { min: 0, max: 64 },
        default: ParamDefault::Real(12.0),
        doc: "maximum depth per tree",
    },
    ParamSpec {
        key: "min_samples_leaf",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(1.0),
        doc: "smallest admissible leaf size",
    },
    ParamSpec {
        key: "max_features",
        kind: ParamKind::Integer { min: 0, max: 1_000_000 },
        default: ParamDefault::Real(0.0),
        doc: "features examined per split; 0 means all",
    },
];

const ADABOOST: &[ParamSpec] = &[
    ParamSpec {
        key: "n_stages",
        kind: ParamKind::Integer { min: 1, max: 100_000 },
        default: ParamDefault::Real(50.0),
        doc: "maximum boosting rounds",
    },
    ParamSpec {
        key: "base_depth",
        kind: ParamKind::Integer { min: 0, max: 64 },
        default: ParamDefault::Real(4.0),
        doc: "depth of each base tree",
    },
    ParamSpec {
        key: "min_samples_leaf",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(1.0),
        doc: "smallest admissible leaf size",
    },
];

const GBM: &[ParamSpec] = &[
    ParamSpec {
        key: "n_stages",
        kind: ParamKind::Integer { min: 1, max: 100_000 },
        default: ParamDefault::Real(100.0),
        doc: "boosting rounds",
    },
    ParamSpec {
        key: "max_depth",
        kind: ParamKind::Integer { min: 0, max: 64 },
        default: ParamDefault::Real(3.0),
        doc: "depth of each stage tree",
    },
    ParamSpec {
        key: "min_samples_leaf",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(1.0),
        doc: "smallest admissible leaf size",
    },
    ParamSpec {
        key: "shrinkage",
        kind: ParamKind::Real { min: 1e-12, max: 2.0 },
        default: ParamDefault::Real(0.1),
        doc: "learning rate applied to every stage",
    },
    ParamSpec {
        key: "line_search",
        kind: ParamKind::Flag,
        default: ParamDefault::Real(1.0),
        doc: "rescale each stage by the least-squares step length",
    },
];

const REGULARIZED_GBM: &[ParamSpec] = &[
    ParamSpec {
        key: "n_stages",
        kind: ParamKind::Integer { min: 1, max: 100_000 },
        default: ParamDefault::Real(100.0),
        doc: "boosting rounds",
    },
    ParamSpec {
        key: "max_depth",
        kind: ParamKind::Integer { min: 0, max: 64 },
        default: ParamDefault::Real(3.0),
        doc: "depth of each stage tree",
    },
    ParamSpec {
        key: "min_samples_leaf",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(1.0),
        doc: "smallest admissible leaf size",
    },
    ParamSpec {
        key: "shrinkage",
        kind: ParamKind::Real { min: 1e-12, max: 2.0 },
        default: ParamDefault::Real(0.1),
        doc: "learning rate applied to every stage",
    },
    ParamSpec {
        key: "lambda",
        kind: ParamKind::Real { min: 0.0, max: POS },
        default: ParamDefault::Real(1.0),
        doc: "L2 penalty on leaf weights",
    },
    ParamSpec {
        key: "alpha",
        kind: ParamKind::Real { min: 0.0, max: POS },
        default: ParamDefault::Real(0.0),
        doc: "L1 penalty on leaf weights",
    },
    ParamSpec {
        key: "gamma",
        kind: ParamKind::Real { min: 0.0, max: POS },
        default: ParamDefault::Real(0.0),
        doc: "minimum gain a split must exceed to be kept",
    },
];

const HGBM: &[ParamSpec] = &[
    ParamSpec {
        key: "n_stages",
        kind: ParamKind::Integer { min: 1, max: 100_000 },
        default: ParamDefault::Real(100.0),
        doc: "boosting rounds",
    },
    ParamSpec {
        key: "max_depth",
        kind: ParamKind::Integer { min: 0, max: 64 },
        default: ParamDefault::Real(3.0),
        doc: "depth of each stage tree",
    },
    ParamSpec {
        key: "min_samples_leaf",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(1.0),
        doc: "smallest admissible leaf size",
    },
    ParamSpec {
        key: "shrinkage",
        kind: ParamKind::Real { min: 1e-12, max: 2.0 },
        default: ParamDefault::Real(0.1),
        doc: "learning rate applied to every stage",
    },
    ParamSpec {
        key: "n_bins",
        kind: ParamKind::Integer { min: 2, max: 65_535 },
        default: ParamDefault::Real(255.0),
        doc: "equal-frequency histogram bins per feature",
    },
];

const ORDERED_GBM: &[ParamSpec] = &[
    ParamSpec {
        key: "n_stages",
        kind: ParamKind::Integer { min: 1, max: 100_000 },
        default: ParamDefault::Real(100.0),
        doc: "boosting rounds",
    },
    ParamSpec {
        key: "max_depth",
        kind: ParamKind::Integer { min: 0, max: 64 },
        default: ParamDefault::Real(3.0),
        doc: "depth of each stage tree",
    },
    ParamSpec {
        key: "min_samples_leaf",
        kind: ParamKind::Integer { min: 1, max: 1_000_000 },
        default: ParamDefault::Real(1.0),
        doc: "smallest admissible leaf size",
    },
    ParamSpec {
        key: "shrinkage",
        kind: ParamKind::Real { min: 1e-12, max: 2.0 },
        default: ParamDefault::Real(0.1),
        doc: "learning rate applied to every stage",
    },
    ParamSpec {
        key: "n_permutations",
        kind: ParamKind::Integer { min: 1, max: 64 },
        default: ParamDefault::Real(4.0),
        doc: "independent orderings averaged at prediction time",
    },
];

/// Declared hyperparameters for a family; empty for families without any.
pub fn family_params(family: Family) -> &'static [ParamSpec] {
    match family {
        Family::Ols | Family::Svm | Family::Bayesian | Family::Mlp | Family::Lstm => &[],
        Family::Lasso => LASSO,
        Family::ElasticNet => ELASTIC_NET,
        Family::Sgd => SGD,
        Family::Knn => KNN,
        Family::Cart => CART,
        Family::RandomForest => RANDOM_FOREST,
        Family::ExtraTrees => EXTRA_TREES,
        Family::AdaboostR2 => ADABOOST,
        Family::Gbm => GBM,
        Family::RegularizedGbm => REGULARIZED_GBM,
        Family::Hgbm => HGBM,
        Family::OrderedGbm => ORDERED_GBM,
    }
}

pub fn lookup(family: Family, key: &str) -> Option<&'static ParamSpec> {
    family_params(family).iter().find(|p| p.key == key)
}

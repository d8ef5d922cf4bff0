//! Regression model registry, training dispatch, and fitted-model API.
//!
//! A [`RegressorSpec`] names a model family, carries validated
//! hyperparameters, and pins the seed that makes training deterministic.
//! [`fit`] turns a spec plus a [`Dataset`](crate::dataset::Dataset) into a
//! [`FittedModel`] that predicts, reports warnings collected during
//! training, and serializes to a line-oriented text format
//! ([`serialize`]).
//!
//! Implemented families: `ols`, `lasso`, `elastic_net`, `sgd`, `knn`,
//! `cart`, `random_forest`, `extra_trees`, `adaboost_r2`, `gbm`,
//! `regularized_gbm`, `hgbm`, and `ordered_gbm`. The registry also names
//! `svm`, `bayesian`, `mlp`, and `lstm` so configuration files can mention
//! them, but fitting those returns an error explaining what is missing.

pub mod adaboost;
pub mod boost;
pub mod forest;
pub mod knn;
pub mod linear;
pub mod params;
pub mod serialize;
pub(crate) mod standardize;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt;

use ndarray::ArrayView2;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use params::{ParamDefault, ParamKind, ParamSpec};
pub use tree::{regularized_leaf_weight, Tree, TreeNode};

/// Every model family the toolkit knows by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Ols,
    Lasso,
    ElasticNet,
    Sgd,
    Knn,
    Cart,
    RandomForest,
    ExtraTrees,
    AdaboostR2,
    Gbm,
    RegularizedGbm,
    Hgbm,
    OrderedGbm,
    Svm,
    Bayesian,
    Mlp,
    Lstm,
}

impl Family {
    pub const ALL: [Family; 17] = [
        Family::Ols,
        Family::Lasso,
        Family::ElasticNet,
        Family::Sgd,
        Family::Knn,
        Family::Cart,
        Family::RandomForest,
        Family::ExtraTrees,
        Family::AdaboostR2,
        Family::Gbm,
        Family::RegularizedGbm,
        Family::Hgbm,
        Family::OrderedGbm,
        Family::Svm,
        Family::Bayesian,
        Family::Mlp,
        Family::Lstm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Ols => "ols",
            Family::Lasso => "lasso",
            Family::ElasticNet => "elastic_net",
            Family::Sgd => "sgd",
            Family::Knn => "knn",
            Family::Cart => "cart",
            Family::RandomForest => "random_forest",
            Family::ExtraTrees => "extra_trees",
            Family::AdaboostR2 => "adaboost_r2",
            Family::Gbm => "gbm",
            Family::RegularizedGbm => "regularized_gbm",
            Family::Hgbm => "hgbm",
            Family::OrderedGbm => "ordered_gbm",
            Family::Svm => "svm",
            Family::Bayesian => "bayesian",
            Family::Mlp => "mlp",
            Family::Lstm => "lstm",
        }
    }

    pub fn parse(name: &str) -> Result<Family> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownFamily {
                family: name.to_string(),
            })
    }

    /// Whether [`fit`] can train this family.
    pub fn implemented(&self) -> bool {
        self.availability_note().is_none()
    }

    /// For registry-only families, why training is unavailable.
    pub fn availability_note(&self) -> Option<&'static str> {
        match self {
            Family::Svm => Some(
                "support-vector regression needs a quadratic-programming solver \
                 that this toolkit does not ship",
            ),
            Family::Bayesian => Some(
                "Bayesian regression with evidence-based hyperparameter updates \
                 is not part of this toolkit's training stack",
            ),
            Family::Mlp => Some(
                "multilayer-perceptron training is not part of this toolkit's \
                 training stack",
            ),
            Family::Lstm => Some(
                "recurrent sequence models are not part of this toolkit's \
                 training stack",
            ),
            _ => None,
        }
    }

    /// All families [`fit`] can train, in registry order.
    pub fn implemented_families() -> Vec<Family> {
        Family::ALL.iter().copied().filter(Family::implemented).collect()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A hyperparameter value: numeric or token.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Real(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

/// A model family plus validated hyperparameters and a training seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorSpec {
    family: Family,
    params: BTreeMap<String, ParamValue>,
    seed: u64,
}

impl RegressorSpec {
    /// Spec for `family_name` with every hyperparameter at its default and
    /// seed 0.
    pub fn new(family_name: &str) -> Result<Self> {
        Ok(RegressorSpec::for_family(Family::parse(family_name)?))
    }

    pub fn for_family(family: Family) -> Self {
        let params = params::family_params(family)
            .iter()
            .map(|p| {
                let value = match p.default {
                    ParamDefault::Real(v) => ParamValue::Real(v),
                    ParamDefault::Text(t) => ParamValue::Text(t.to_string()),
                };
                (p.key.to_string(), value)
            })
            .collect();
        RegressorSpec {
            family,
            params,
            seed: 0,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }

    /// Validated override of one hyperparameter; unknown keys and
    /// out-of-range values are rejected.
    pub fn set(&mut self, key: &str, value: ParamValue) -> Result<()> {
        let spec = params::lookup(self.family, key).ok_or_else(|| {
            Error::InvalidHyperparameter {
                family: self.family.name().to_string(),
                message: format!(
                    "unknown hyperparameter `{key}` (known: {})",
                    known_keys(self.family)
                ),
            }
        })?;
        validate(self.family, spec, &value)?;
        self.params.insert(key.to_string(), value);
        Ok(())
    }

    /// [`set`](Self::set) with the value parsed from text: numeric when it
    /// parses as a float, token otherwise.
    pub fn set_str(&mut self, key: &str, raw: &str) -> Result<()> {
        let value = match raw.parse::<f64>() {
            Ok(v) => ParamValue::Real(v),
            Err(_) => ParamValue::Text(raw.to_string()),
        };
        self.set(key, value)
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.params.get(key)
    }

    /// All hyperparameters (defaults merged with overrides), sorted by key.
    pub fn params(&self) -> &BTreeMap<String, ParamValue> {
        &self.params
    }

    fn real(&self, key: &str) -> f64 {
        match self.params.get(key) {
            Some(ParamValue::Real(v)) => *v,
            other => panic!("hyperparameter `{key}` missing or non-numeric: {other:?}"),
        }
    }

    fn int(&self, key: &str) -> usize {
        self.real(key) as usize
    }

    fn flag(&self, key: &str) -> bool {
        self.real(key) != 0.0
    }

    fn text(&self, key: &str) -> &str {
        match self.params.get(key) {
            Some(ParamValue::Text(s)) => s,
            other => panic!("hyperparameter `{key}` missing or non-text: {other:?}"),
        }
    }
}

fn known_keys(family: Family) -> String {
    let keys: Vec<&str> = params::family_params(family).iter().map(|p| p.key).collect();
    if keys.is_empty() {
        "none".to_string()
    } else {
        keys.join(", ")
    }
}

fn validate(family: Family, spec: &ParamSpec, value: &ParamValue) -> Result<()> {
    let fail = |message: String| {
        Err(Error::InvalidHyperparameter {
            family: family.name().to_string(),
            message,
        })
    };
    match (&spec.kind, value) {
        (ParamKind::Real { min, max }, ParamValue::Real(v)) => {
            if !v.is_finite() && *max != f64::INFINITY {
                return fail(format!("`{}` must be finite, got {v}", spec.key));
            }
            if v.is_nan() || *v < *min || *v > *max {
                return fail(format!(
                    "`{}` must lie in [{min}, {max}], got {v}",
                    spec.key
                ));
            }
            Ok(())
        }
        (ParamKind::Integer { min, max }, ParamValue::Real(v)) => {
            if !v.is_finite() || v.fract() != 0.0 || *v < 0.0 {
                return fail(format!(
                    "`{}` must be a non-negative integer, got {v}",
                    spec.key
                ));
            }
            let i = *v as u64;
            if i < *min || i > *max {
                return fail(format!(
                    "`{}` must lie in [{min}, {max}], got {i}",
                    spec.key
                ));
            }
            Ok(())
        }
        (ParamKind::Flag, ParamValue::Real(v)) => {
            if *v == 0.0 || *v == 1.0 {
                Ok(())
            } else {
                fail(format!("`{}` must be 0 or 1, got {v}", spec.key))
            }
        }
        (ParamKind::Choice { options }, ParamValue::Text(s)) => {
            if options.contains(&s.as_str()) {
                Ok(())
            } else {
                fail(format!(
                    "`{}` must be one of {}, got `{s}`",
                    spec.key,
                    options.join("|")
                ))
            }
        }
        (ParamKind::Choice { options }, ParamValue::Real(v)) => fail(format!(
            "`{}` expects one of {}, got number {v}",
            spec.key,
            options.join("|")
        )),
        (_, ParamValue::Text(s)) => fail(format!(
            "`{}` expects a number, got `{s}`",
            spec.key
        )),
    }
}

/// Neighbour weighting for `knn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Uniform,
    InverseDistance,
}

impl Weighting {
    pub fn as_str(&self) -> &'static str {
        match self {
            Weighting::Uniform => "uniform",
            Weighting::InverseDistance => "inverse_distance",
        }
    }

    fn parse(s: &str) -> Weighting {
        match s {
            "inverse_distance" => Weighting::InverseDistance,
            _ => Weighting::Uniform,
        }
    }
}

/// The learned state behind a [`FittedModel`].
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// `intercept + weights . x` on raw feature scale.
    Linear { weights: Vec<f64>, intercept: f64 },
    /// Standardized training rows kept for neighbour lookups.
    Knn {
        k: usize,
        weighting: Weighting,
        means: Vec<f64>,
        scales: Vec<f64>,
        /// Row-major standardized training matrix.
        train: Vec<f64>,
        targets: Vec<f64>,
    },
    Cart { tree: Tree },
    /// Averaged trees (random forest, extremely randomized trees).
    Forest { trees: Vec<Tree> },
    /// Weighted-median ensemble with per-stage log weights.
    Adaboost { trees: Vec<Tree>, log_weights: Vec<f64> },
    /// `f0 + shrinkage * sum(coeff_m * tree_m(x))`.
    Boosted {
        f0: f64,
        shrinkage: f64,
        coeffs: Vec<f64>,
        trees: Vec<Tree>,
    },
    /// Permutation-averaged boosted chains sharing `f0` and `shrinkage`.
    OrderedBoost {
        f0: f64,
        shrinkage: f64,
        chains: Vec<Vec<Tree>>,
    },
}

/// A trained model: resolved spec, schema it was fitted on, warnings
/// collected while training, and the learned state.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub spec: RegressorSpec,
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub warnings: Vec<String>,
    pub kind: ModelKind,
}

impl FittedModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Prediction for one row in schema order.
    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                context: "predict".to_string(),
                expected: self.n_features(),
                actual: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "prediction rows must be finite".to_string(),
            ));
        }
        Ok(self.predict_unchecked(row))
    }

    fn predict_unchecked(&self, row: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::Linear { weights, intercept } => {
                intercept + weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
            }
            ModelKind::Knn {
                k,
                weighting,
                means,
                scales,
                train,
                targets,
            } => knn::predict(*k, *weighting, means, scales, train, targets, row),
            ModelKind::Cart { tree } => tree.predict_row(row),
            ModelKind::Forest { trees } => {
                trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / trees.len() as f64
            }
            ModelKind::Adaboost { trees, log_weights } => {
                adaboost::weighted_median(trees, log_weights, row)
            }
            ModelKind::Boosted {
                f0,
                shrinkage,
                coeffs,
                trees,
            } => {
                let staged: f64 = coeffs
                    .iter()
                    .zip(trees)
                    .map(|(c, t)| c * t.predict_row(row))
                    .sum();
                f0 + shrinkage * staged
            }
            ModelKind::OrderedBoost {
                f0,
                shrinkage,
                chains,
            } => {
                let total: f64 = chains
                    .iter()
                    .map(|chain| {
                        f0 + shrinkage
                            * chain.iter().map(|t| t.predict_row(row)).sum::<f64>()
                    })
                    .sum();
                total / chains.len() as f64
            }
        }
    }

    /// Predictions for a row-major matrix in schema order.
    pub fn predict_rows(&self, rows: &ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if rows.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                context: "predict".to_string(),
                expected: self.n_features(),
                actual: rows.ncols(),
            });
        }
        let mut out = Vec::with_capacity(rows.nrows());
        let mut buf = vec![0.0; rows.ncols()];
        for i in 0..rows.nrows() {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = rows[[i, j]];
            }
            if buf.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(
                    "prediction rows must be finite".to_string(),
                ));
            }
            out.push(self.predict_unchecked(&buf));
        }
        Ok(out)
    }

    /// Predictions for every row of a dataset sharing this model's schema.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.predict_rows(&data.rows.view())
    }
}

/// Train `spec` on `data`.
///
/// Training data must be cleaned: every feature and target value finite.
/// Registry-only families fail with an explanation; families with random
/// elements draw everything from streams derived from `spec.seed()`, so
/// refits reproduce bit-identical models.
pub fn fit(spec: &RegressorSpec, data: &Dataset) -> Result<FittedModel> {
    if let Some(note) = spec.family().availability_note() {
        return Err(Error::UnimplementedFamily {
            family: spec.family().name().to_string(),
            note: note.to_string(),
        });
    }
    if data.n_rows() == 0 {
        return Err(Error::EmptyInput {
            context: "model training".to_string(),
        });
    }
    let finite = data.rows.iter().all(|v| v.is_finite())
        && data.target.iter().all(|v| v.is_finite());
    if !finite {
        return Err(Error::InvalidArgument(
            "training data must be finite; run cleaning first".to_string(),
        ));
    }

    let (kind, warnings) = match spec.family() {
        Family::Ols => linear::fit_ols(data)?,
        Family::Lasso => linear::fit_coordinate_descent(
            data,
            spec.real("lambda"),
            0.0,
            spec.real("tol"),
            spec.int("max_cycles"),
        )?,
        Family::ElasticNet => linear::fit_coordinate_descent(
            data,
            spec.real("lambda1"),
            spec.real("lambda2"),
            spec.real("tol"),
            spec.int("max_cycles"),
        )?,
        Family::Sgd => linear::fit_sgd(
            data,
            spec.real("learning_rate"),
            spec.int("epochs"),
            spec.seed(),
        )?,
        Family::Knn => knn::fit(
            data,
            spec.int("k"),
            Weighting::parse(spec.text("weighting")),
        )?,
        Family::Cart => forest::fit_cart(
            data,
            spec.int("max_depth"),
            spec.int("min_samples_leaf"),
            spec.real("ccp_alpha"),
        )?,
        Family::RandomForest => forest::fit_random_forest(
            data,
            forest::ForestParams {
                n_trees: spec.int("n_trees"),
                max_depth: spec.int("max_depth"),
                min_samples_leaf: spec.int("min_samples_leaf"),
                max_features: spec.int("max_features"),
                bootstrap: spec.flag("bootstrap"),
            },
            spec.seed(),
        )?,
        Family::ExtraTrees => forest::fit_extra_trees(
            data,
            forest::ForestParams {
                n_trees: spec.int("n_trees"),
                max_depth: spec.int("max_depth"),
                min_samples_leaf: spec.int("min_samples_leaf"),
                max_features: spec.int("max_features"),
                bootstrap: false,
            },
            spec.seed(),
        )?,
        Family::AdaboostR2 => adaboost::fit(
            data,
            spec.int("n_stages"),
            spec.int("base_depth"),
            spec.int("min_samples_leaf"),
            spec.seed(),
        )?,
        Family::Gbm => boost::fit_gbm(
            data,
            boost::BoostParams {
                n_stages: spec.int("n_stages"),
                max_depth: spec.int("max_depth"),
                min_samples_leaf: spec.int("min_samples_leaf"),
                shrinkage: spec.real("shrinkage"),
            },
            spec.flag("line_search"),
        )?,
        Family::RegularizedGbm => boost::fit_regularized_gbm(
            data,
            boost::BoostParams {
                n_stages: spec.int("n_stages"),
                max_depth: spec.int("max_depth"),
                min_samples_leaf: spec.int("min_samples_leaf"),
                shrinkage: spec.real("shrinkage"),
            },
            boost::Penalties {
                lambda: spec.real("lambda"),
                alpha: spec.real("alpha"),
                gamma: spec.real("gamma"),
            },
        )?,
        Family::Hgbm => boost::fit_hgbm(
            data,
            boost::BoostParams {
                n_stages: spec.int("n_stages"),
                max_depth: spec.int("max_depth"),
                min_samples_leaf: spec.int("min_samples_leaf"),
                shrinkage: spec.real("shrinkage"),
            },
            spec.int("n_bins"),
        )?,
        Family::OrderedGbm => {
            let (kind, warnings, _) = boost::fit_ordered_gbm_traced(
                data,
                boost::BoostParams {
                    n_stages: spec.int("n_stages"),
                    max_depth: spec.int("max_depth"),
                    min_samples_leaf: spec.int("min_samples_leaf"),
                    shrinkage: spec.real("shrinkage"),
                },
                spec.int("n_permutations"),
                spec.seed(),
                false,
            )?;
            (kind, warnings)
        }
        Family::Svm | Family::Bayesian | Family::Mlp | Family::Lstm => unreachable!(),
    };

    Ok(FittedModel {
        spec: spec.clone(),
        feature_names: data.schema.feature_names().to_vec(),
        target_name: data.target_name().to_string(),
        warnings,
        kind,
    })
}

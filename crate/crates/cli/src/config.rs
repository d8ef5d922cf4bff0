//! Pipeline configuration: a TOML file with documented keys.
//!
//! Every key has a default, so a minimal config can be a single line.
//! Parsing then re-serializing a config reproduces the same value
//! (round-trip stability), and the SHA-256 hash of the canonical
//! serialization identifies a run in the manifest.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use millopt_core::models::{ParamValue, RegressorSpec};

/// Known optimization-campaign method labels.
pub const METHOD_LABELS: [&str; 5] = ["de", "ga", "pso", "uniform", "latin_hypercube"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed; every stage derives its own stream from it.
    pub seed: u64,
    pub data: DataConfig,
    pub output: OutputConfig,
    pub clean: CleanConfig,
    pub cv: CvConfig,
    pub models: ModelsConfig,
    pub lof: LofConfig,
    pub rfe: RfeConfig,
    pub campaign: CampaignConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            data: DataConfig::default(),
            output: OutputConfig::default(),
            clean: CleanConfig::default(),
            cv: CvConfig::default(),
            models: ModelsConfig::default(),
            lof: LofConfig::default(),
            rfe: RfeConfig::default(),
            campaign: CampaignConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// `"csv"` reads `csv` against `schema`; `"synthetic"` generates data.
    pub source: String,
    /// Dataset path when `source = "csv"`.
    pub csv: String,
    /// Schema path when `source = "csv"`.
    pub schema: String,
    pub synthetic: SyntheticConfig,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            source: "synthetic".into(),
            csv: String::new(),
            schema: String::new(),
            synthetic: SyntheticConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n: usize,
    pub seed: u64,
    pub noise_std: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            seed: 7,
            noise_std: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "millopt_run".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanConfig {
    pub enabled: bool,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self { enabled: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    /// Fold count for the model-comparison stage.
    pub k: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { k: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsConfig {
    /// Families entered in the comparison.
    pub roster: Vec<String>,
    /// When non-empty, this family (which must be on the roster) proceeds
    /// to the later stages regardless of rank.
    pub pinned: String,
    /// The final model is the best of this many refits on a held-out split.
    /// ("Best of 5 runs" is ambiguous between CV repetitions and refits;
    /// this toolkit reads it as refits with different seeds.)
    pub best_of_refits: usize,
    /// Per-family hyperparameter overrides, e.g. `[models.params.gbm]
    /// n_stages = 150`. Numbers become numeric parameters, strings become
    /// text parameters.
    pub params: BTreeMap<String, BTreeMap<String, toml::Value>>,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        Self {
            roster: vec![
                "ols".into(),
                "cart".into(),
                "random_forest".into(),
                "gbm".into(),
            ],
            pinned: String::new(),
            best_of_refits: 5,
            params: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LofConfig {
    pub enabled: bool,
    /// Neighbourhood size.
    pub k: usize,
    /// Score cutoff; rows strictly above are outlier candidates. `0.0`
    /// selects the automatic 99th-percentile threshold.
    pub threshold: f64,
    /// Relative improvement in median CV R^2 required before removal is
    /// actually applied (1% by default; smaller gains are treated as noise).
    pub margin: f64,
}

impl Default for LofConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            k: 10,
            threshold: 0.0,
            margin: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfeConfig {
    pub enabled: bool,
    /// Family used to score features; empty means "the rank winner".
    pub trainer: String,
    /// Fixed subset size; `0` sweeps `sweep_min..=sweep_max` instead and
    /// keeps the best cross-validated size.
    pub target_k: usize,
    pub sweep_min: usize,
    pub sweep_max: usize,
    /// Fold count for scoring subset sizes during a sweep.
    pub folds: usize,
}

impl Default for RfeConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            trainer: String::new(),
            target_k: 0,
            sweep_min: 10,
            sweep_max: 20,
            folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    /// Any of `de`, `ga`, `pso`, `uniform`, `latin_hypercube`.
    pub methods: Vec<String>,
    /// Independent repetitions per method.
    pub runs: usize,
    pub population: usize,
    pub generations: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            methods: METHOD_LABELS.iter().map(|s| s.to_string()).collect(),
            runs: 10,
            population: 25,
            generations: 49,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: Self = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(config)
    }

    /// Canonical serialization; hashing and round-trip checks use this form.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).context("serializing config")
    }

    /// `sha256:<hex>` of the canonical serialization.
    pub fn hash(&self) -> Result<String> {
        let mut hasher = Sha256::new();
        hasher.update(self.to_toml()?.as_bytes());
        Ok(format!("sha256:{:x}", hasher.finalize()))
    }

    /// Evaluation budget shared by every campaign method: the optimizers
    /// score the initial population plus one population per generation, and
    /// the samplers draw the same number of points.
    pub fn evaluation_budget(&self) -> usize {
        self.campaign.population * (self.campaign.generations + 1)
    }

    /// Reject impossible settings before any stage runs.
    pub fn validate(&self) -> Result<()> {
        match self.data.source.as_str() {
            "csv" => {
                if self.data.csv.is_empty() || self.data.schema.is_empty() {
                    bail!("data.source = \"csv\" requires data.csv and data.schema paths");
                }
            }
            "synthetic" => {
                if self.data.synthetic.n == 0 {
                    bail!("data.synthetic.n must be positive");
                }
            }
            other => bail!("data.source must be \"csv\" or \"synthetic\", got {other:?}"),
        }
        if self.cv.k < 2 {
            bail!("cv.k must be at least 2");
        }
        if self.models.roster.is_empty() {
            bail!("models.roster must name at least one family");
        }
        for family in &self.models.roster {
            self.build_spec(family, 0)
                .with_context(|| format!("roster entry {family:?}"))?;
        }
        if !self.models.pinned.is_empty() && !self.models.roster.contains(&self.models.pinned) {
            bail!(
                "models.pinned {:?} is not on the roster {:?}",
                self.models.pinned,
                self.models.roster
            );
        }
        if self.models.best_of_refits == 0 {
            bail!("models.best_of_refits must be at least 1");
        }
        for family in self.models.params.keys() {
            self.build_spec(family, 0)
                .with_context(|| format!("models.params entry {family:?}"))?;
        }
        if self.lof.enabled {
            if self.lof.k == 0 {
                bail!("lof.k must be at least 1");
            }
            if !self.lof.margin.is_finite() || self.lof.margin < 0.0 {
                bail!("lof.margin must be finite and non-negative");
            }
            if !self.lof.threshold.is_finite() || self.lof.threshold < 0.0 {
                bail!("lof.threshold must be finite and non-negative (0 = automatic)");
            }
        }
        if self.rfe.enabled {
            if !self.rfe.trainer.is_empty() {
                self.build_spec(&self.rfe.trainer, 0)
                    .context("rfe.trainer")?;
            }
            if self.rfe.target_k == 0 {
                if self.rfe.sweep_min == 0 || self.rfe.sweep_min > self.rfe.sweep_max {
                    bail!(
                        "rfe sweep range [{}, {}] is empty",
                        self.rfe.sweep_min,
                        self.rfe.sweep_max
                    );
                }
                if self.rfe.folds < 2 {
                    bail!("rfe.folds must be at least 2");
                }
            }
        }
        if self.campaign.methods.is_empty() {
            bail!("campaign.methods must name at least one method");
        }
        for method in &self.campaign.methods {
            if !METHOD_LABELS.contains(&method.as_str()) {
                bail!(
                    "unknown campaign method {method:?}; choose from {:?}",
                    METHOD_LABELS
                );
            }
        }
        if self.campaign.runs == 0 {
            bail!("campaign.runs must be at least 1");
        }
        if self.campaign.population < 4 {
            bail!("campaign.population must be at least 4");
        }
        if self.campaign.generations == 0 {
            bail!("campaign.generations must be at least 1");
        }
        Ok(())
    }

    /// A seeded spec for `family` with this config's hyperparameter
    /// overrides applied.  Registry-only families are rejected here so the
    /// pipeline aborts before any stage runs instead of mid-comparison.
    pub fn build_spec(&self, family: &str, seed: u64) -> Result<RegressorSpec> {
        let mut spec = RegressorSpec::new(family)?.with_seed(seed);
        if let Some(note) = spec.family().availability_note() {
            bail!("model family '{family}' is registered but not implemented: {note}");
        }
        if let Some(overrides) = self.models.params.get(family) {
            for (key, value) in overrides {
                let param = match value {
                    toml::Value::Integer(i) => ParamValue::Real(*i as f64),
                    toml::Value::Float(f) => ParamValue::Real(*f),
                    toml::Value::String(s) => ParamValue::Text(s.clone()),
                    other => bail!(
                        "hyperparameter {family}.{key} must be a number or string, got {other}"
                    ),
                };
                spec.set(key, param)
                    .with_context(|| format!("hyperparameter {family}.{key}"))?;
            }
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let config = PipelineConfig::default();
        config.validate().unwrap();
        let text = config.to_toml().unwrap();
        let reparsed: PipelineConfig = toml::from_str(&text).unwrap();
        assert_eq!(config, reparsed);
        assert_eq!(config.hash().unwrap(), reparsed.hash().unwrap());
    }

    #[test]
    fn minimal_and_overridden_configs_round_trip() {
        let minimal: PipelineConfig = toml::from_str("").unwrap();
        assert_eq!(minimal, PipelineConfig::default());

        let text = r#"
            seed = 99
            [models]
            roster = ["ols", "gbm"]
            [models.params.gbm]
            n_stages = 150
            shrinkage = 0.05
            [campaign]
            methods = ["de", "uniform"]
            runs = 3
        "#;
        let config: PipelineConfig = toml::from_str(text).unwrap();
        config.validate().unwrap();
        assert_eq!(config.seed, 99);
        let reparsed: PipelineConfig = toml::from_str(&config.to_toml().unwrap()).unwrap();
        assert_eq!(config, reparsed);
    }

    #[test]
    fn hyperparameter_overrides_reach_the_spec() {
        let text = r#"
            [models.params.gbm]
            n_stages = 150
        "#;
        let config: PipelineConfig = toml::from_str(text).unwrap();
        let spec = config.build_spec("gbm", 1).unwrap();
        assert_eq!(spec.get("n_stages"), Some(&ParamValue::Real(150.0)));
    }

    #[test]
    fn bad_configs_are_rejected_with_reasons() {
        let out_of_scope: PipelineConfig = toml::from_str(
            r#"
            [models]
            roster = ["ols", "mlp"]
        "#,
        )
        .unwrap();
        let message = format!("{:#}", out_of_scope.validate().unwrap_err());
        assert!(message.contains("mlp"), "message was: {message}");

        let unknown_method: PipelineConfig = toml::from_str(
            r#"
            [campaign]
            methods = ["annealing"]
        "#,
        )
        .unwrap();
        assert!(unknown_method.validate().is_err());

        let bad_source: PipelineConfig = toml::from_str(r#"
            [data]
            source = "parquet"
        "#)
        .unwrap();
        assert!(bad_source.validate().is_err());

        assert!(toml::from_str::<PipelineConfig>("no_such_key = 1").is_err());
    }
}

//! Experiment configuration file (TOML).
//!
//! ```toml
//! seed = 1
//!
//! [data]
//! path = "market.csv"
//! fill = "reject"
//!
//! [columns]
//! inputs = ["oil", "gas", "gold", "exchange_rate", "volume"]
//! targets = ["tepix", "industry"]
//!
//! [[regime]]
//! name = "sanction"
//! start = "2008-12-01"
//! end = "2013-12-31"
//!
//! [network]
//! hidden = "auto"
//! targets = "separate"
//! ```
//!
//! Every other section falls back to defaults. Relative paths resolve against
//! the directory holding the config file.

use std::fmt;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use regime_ffnn::dataset::{FillPolicy, LoadOptions, Schema};
use regime_ffnn::trainer::BatchMode;
use regime_ffnn::{Activation, Column, RegimeSpec, SplitFractions, TrainingConfig};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub data: DataSection,
    pub columns: ColumnsSection,
    #[serde(default, rename = "regime")]
    pub regimes: Vec<RegimeSection>,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub scaler: ScalerSection,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Written by `run` into the manifest; ignored on input.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub resolved: Vec<toml::Table>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
    #[serde(default = "default_fill")]
    pub fill: String,
    #[serde(default)]
    pub sort_dates: bool,
    #[serde(default)]
    pub log_transform: Vec<String>,
}

fn default_fill() -> String {
    FillPolicy::Reject.as_str().to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnsSection {
    pub inputs: Vec<String>,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeSection {
    pub name: String,
    pub start: DateValue,
    pub end: DateValue,
}

/// Accepts both `"2008-12-01"` and a bare TOML date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DateValue {
    Text(String),
    Toml(toml::value::Datetime),
}

impl DateValue {
    fn parse(&self) -> Result<NaiveDate, String> {
        let text = match self {
            DateValue::Text(s) => s.clone(),
            DateValue::Toml(d) => d.to_string(),
        };
        NaiveDate::parse_from_str(&text, "%Y-%m-%d")
            .map_err(|_| format!("'{text}' is not a YYYY-MM-DD date"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub train: f64,
    pub test: f64,
    pub validation: f64,
}

impl Default for SplitSection {
    fn default() -> Self {
        let d = SplitFractions::DEFAULT;
        Self {
            train: d.train,
            test: d.test,
            validation: d.validation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalerPolicy {
    /// Fit on the training block of each regime.
    #[default]
    TrainOnly,
    /// Fit on every row of the regime, test block included.
    Global,
}

impl fmt::Display for ScalerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalerPolicy::TrainOnly => "train-only",
            ScalerPolicy::Global => "global",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalerSection {
    #[serde(default)]
    pub policy: ScalerPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetMode {
    /// One network per target.
    #[default]
    Separate,
    /// One network with every target as an output.
    Joint,
}

impl fmt::Display for TargetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetMode::Separate => "separate",
            TargetMode::Joint => "joint",
        })
    }
}

/// `"auto"` or a neuron count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CountOrKeyword {
    Count(usize),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(default = "auto")]
    pub hidden: CountOrKeyword,
    #[serde(default = "sigmoid")]
    pub hidden_activation: String,
    #[serde(default = "linear")]
    pub output_activation: String,
    #[serde(default)]
    pub targets: TargetMode,
    /// Weight-initialization seed; the top-level seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn auto() -> CountOrKeyword {
    CountOrKeyword::Keyword("auto".into())
}

fn sigmoid() -> String {
    "sigmoid".into()
}

fn linear() -> String {
    "linear".into()
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            hidden: auto(),
            hidden_activation: sigmoid(),
            output_activation: linear(),
            targets: TargetMode::default(),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    /// `"full"` or a mini-batch size.
    pub batch: CountOrKeyword,
    pub patience: usize,
    pub tolerance: f64,
    /// Shuffle seed; the top-level seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let d = TrainingConfig::default();
        Self {
            learning_rate: d.learning_rate,
            momentum: d.momentum,
            max_epochs: d.max_epochs,
            batch: CountOrKeyword::Keyword("full".into()),
            patience: d.patience,
            tolerance: d.tolerance,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub hit_epsilon: f64,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            hit_epsilon: regime_ffnn::metrics::DEFAULT_HIT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Write an SVG chart next to each prediction CSV.
    #[serde(default = "yes")]
    pub plots: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            plots: true,
        }
    }
}

/// Config values after parsing and checking, ready for the pipeline.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub seed: u64,
    pub data_path: PathBuf,
    pub schema: Schema,
    pub regimes: Vec<RegimeSpec>,
    pub fractions: SplitFractions,
    pub scaler: ScalerPolicy,
    pub hidden: Option<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub target_mode: TargetMode,
    pub network_seed: u64,
    pub training: TrainingConfig,
    pub hit_epsilon: f64,
    pub out_dir: PathBuf,
    pub plots: bool,
}

impl Experiment {
    pub fn input_names(&self) -> Vec<String> {
        self.schema
            .columns
            .iter()
            .filter(|c| c.role == regime_ffnn::ColumnRole::Input)
            .map(|c| c.name.clone())
            .collect()
    }

    pub fn target_names(&self) -> Vec<String> {
        self.schema
            .columns
            .iter()
            .filter(|c| c.role == regime_ffnn::ColumnRole::Target)
            .map(|c| c.name.clone())
            .collect()
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub fit_global: bool,
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    /// Reads a config and makes relative paths absolute against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        let mut config =
            Self::from_toml(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = if base.as_os_str().is_empty() {
            PathBuf::from(".")
        } else {
            base
        };
        let base = std::path::absolute(&base).unwrap_or(base);
        if config.data.path.is_relative() {
            config.data.path = base.join(&config.data.path);
        }
        if config.output.dir.is_relative() {
            config.output.dir = base.join(&config.output.dir);
        }
        Ok(config)
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
            self.network.seed = None;
            self.training.seed = None;
        }
        if let Some(out) = &overrides.out {
            self.output.dir = std::path::absolute(out).unwrap_or_else(|_| out.clone());
        }
        if overrides.fit_global {
            self.scaler.policy = ScalerPolicy::Global;
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Data path and load schema, checked.
    pub fn data_schema(&self) -> Result<(PathBuf, Schema), CliError> {
        if !self.data.path.is_file() {
            return Err(config_error(format!(
                "file not found: {}",
                self.data.path.display()
            )));
        }
        let fill: FillPolicy = self.data.fill.parse().map_err(config_error)?;

        let cols = &self.columns;
        if cols.inputs.is_empty() {
            return Err(config_error("[columns] inputs is empty"));
        }
        if cols.targets.is_empty() {
            return Err(config_error("[columns] targets is empty"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in cols.inputs.iter().chain(&cols.targets) {
            if !seen.insert(name.as_str()) {
                return Err(config_error(format!("column '{name}' listed twice")));
            }
        }
        for name in &self.data.log_transform {
            if !seen.contains(name.as_str()) {
                return Err(config_error(format!(
                    "log_transform names unknown column '{name}'"
                )));
            }
        }
        let columns: Vec<Column> = cols
            .inputs
            .iter()
            .map(Column::input)
            .chain(cols.targets.iter().map(Column::target))
            .collect();
        let schema = Schema::new(columns).with_options(LoadOptions {
            fill,
            sort_dates: self.data.sort_dates,
            log_transform: self.data.log_transform.clone(),
        });
        Ok((self.data.path.clone(), schema))
    }

    /// Checks everything that can be checked without reading the data.
    pub fn validate(&self) -> Result<Experiment, CliError> {
        let (data_path, schema) = self.data_schema()?;

        if self.regimes.is_empty() {
            return Err(config_error("no [[regime]] defined"));
        }
        let mut regimes = Vec::new();
        for r in &self.regimes {
            let start = r
                .start
                .parse()
                .map_err(|m| config_error(format!("regime '{}': {m}", r.name)))?;
            let end = r
                .end
                .parse()
                .map_err(|m| config_error(format!("regime '{}': {m}", r.name)))?;
            if r.name.is_empty() || r.name.contains(['/', '\\', ',']) {
                return Err(config_error(format!(
                    "regime name '{}' must be non-empty, without '/', '\\' or ','",
                    r.name
                )));
            }
            regimes.push(
                RegimeSpec::new(r.name.clone(), start, end)
                    .map_err(|e| config_error(e.to_string()))?,
            );
        }
        let mut names = std::collections::BTreeSet::new();
        for r in &regimes {
            if !names.insert(r.name.as_str()) {
                return Err(config_error(format!("regime '{}' defined twice", r.name)));
            }
        }
        regime_ffnn::dataset::check_disjoint(&regimes).map_err(|e| config_error(e.to_string()))?;

        let fractions =
            SplitFractions::new(self.split.train, self.split.test, self.split.validation)
                .map_err(|e| config_error(e.to_string()))?;

        let hidden = match &self.network.hidden {
            CountOrKeyword::Count(0) => return Err(config_error("hidden must be positive")),
            CountOrKeyword::Count(n) => Some(*n),
            CountOrKeyword::Keyword(k) if k == "auto" => None,
            CountOrKeyword::Keyword(k) => {
                return Err(config_error(format!(
                    "hidden must be \"auto\" or a count, got '{k}'"
                )))
            }
        };
        let hidden_activation: Activation = self
            .network
            .hidden_activation
            .parse()
            .map_err(config_error)?;
        let output_activation: Activation = self
            .network
            .output_activation
            .parse()
            .map_err(config_error)?;
        if !hidden_activation.is_differentiable() || !output_activation.is_differentiable() {
            return Err(config_error(
                "hardlimit activations cannot be trained by gradient descent",
            ));
        }

        let t = &self.training;
        let batch_mode = match &t.batch {
            CountOrKeyword::Count(n) => BatchMode::MiniBatch(*n),
            CountOrKeyword::Keyword(k) if k == "full" => BatchMode::FullBatch,
            CountOrKeyword::Keyword(k) => {
                return Err(config_error(format!(
                    "batch must be \"full\" or a size, got '{k}'"
                )))
            }
        };
        let training = TrainingConfig {
            learning_rate: t.learning_rate,
            momentum: t.momentum,
            max_epochs: t.max_epochs,
            batch_mode,
            patience: t.patience,
            tolerance: t.tolerance,
            seed: t.seed.unwrap_or(self.seed),
        };
        training
            .validate()
            .map_err(|e| config_error(e.to_string()))?;

        let hit_epsilon = self.evaluation.hit_epsilon;
        if hit_epsilon.is_nan() || hit_epsilon <= 0.0 {
            return Err(config_error(format!(
                "hit_epsilon must be positive, got {hit_epsilon}"
            )));
        }

        Ok(Experiment {
            seed: self.seed,
            data_path,
            schema,
            regimes,
            fractions,
            scaler: self.scaler.policy,
            hidden,
            hidden_activation,
            output_activation,
            target_mode: self.network.targets,
            network_seed: self.network.seed.unwrap_or(self.seed),
            training,
            hit_epsilon,
            out_dir: self.output.dir.clone(),
            plots: self.output.plots,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[data]
path = "x.csv"

[columns]
inputs = ["a"]
targets = ["y"]

[[regime]]
name = "one"
start = "2010-01-01"
end = 2011-01-01
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.split, SplitSection::default());
        assert_eq!(c.network.targets, TargetMode::Separate);
        assert_eq!(c.scaler.policy, ScalerPolicy::TrainOnly);
        assert_eq!(c.training.batch, CountOrKeyword::Keyword("full".into()));
        assert_eq!(
            c.regimes[1 - 1].end.parse().unwrap(),
            NaiveDate::from_ymd_opt(2011, 1, 1).unwrap()
        );
    }

    #[test]
    fn serialized_config_reads_back() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("[columns]", "[columns]\nextra = 1");
        assert!(matches!(
            ExperimentConfig::from_toml(&text),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn seed_override_wins_over_section_seeds() {
        let mut c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.network.seed = Some(4);
        c.apply(&Overrides {
            seed: Some(9),
            ..Default::default()
        });
        assert_eq!((c.seed, c.network.seed), (9, None));
    }
}

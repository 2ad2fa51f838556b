//! Experiment configuration: the training method grid, hyperparameters, and
//! the TOML file formats consumed by the CLI.
//!
//! Config files mirror [`ExperimentConfig`] field for field; unknown keys
//! are rejected. Grid files add a master seed and a list of runs, each of
//! which may be replicated with derived seeds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::ArcConfig;
use crate::rng::derive_seed;

/// The training methods of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Cross-entropy only.
    Baseline,
    /// Cross-entropy on Mixup batches.
    BaselineMixup,
    /// Cross-entropy plus ARC on the raw batch.
    Arc,
    /// Cross-entropy on Mixup batches plus ARC per the configured target.
    ArcMixup,
    /// Cross-entropy on raw training batches plus ARC on cycled validation
    /// batches.
    ArcOnValidation,
}

impl Method {
    pub fn mixes(self) -> bool {
        matches!(self, Method::BaselineMixup | Method::ArcMixup)
    }

    pub fn uses_arc(self) -> bool {
        matches!(self, Method::Arc | Method::ArcMixup | Method::ArcOnValidation)
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::BaselineMixup => "baseline_mixup",
            Method::Arc => "arc",
            Method::ArcMixup => "arc_mixup",
            Method::ArcOnValidation => "arc_on_validation",
        }
    }
}

/// Step learning-rate schedule: `initial · decay_factor^k` where `k` counts
/// the decay epochs already reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrSchedule {
    pub initial: f64,
    #[serde(default = "default_decay_factor")]
    pub decay_factor: f64,
    #[serde(default)]
    pub decay_epochs: Vec<usize>,
}

fn default_decay_factor() -> f64 {
    1.0
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule {
            initial: 0.1,
            decay_factor: 0.1,
            decay_epochs: vec![100, 150],
        }
    }
}

impl LrSchedule {
    pub fn rate_at(&self, epoch: usize) -> f64 {
        let steps = self.decay_epochs.iter().filter(|&&e| epoch >= e).count();
        self.initial * self.decay_factor.powi(steps as i32)
    }
}

/// One training run, mirrored one-to-one by the TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    /// Built-in generator name (`overlap2d`, `ring8`) or a CSV path.
    #[serde(default = "default_dataset")]
    pub dataset: String,
    /// Samples drawn when `dataset` names a generator.
    #[serde(default = "default_dataset_size")]
    pub dataset_size: usize,
    /// Train/validation/test fractions.
    #[serde(default = "default_split")]
    pub split: [f64; 3],
    pub layer_sizes: Vec<usize>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub learning_rate: LrSchedule,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    #[serde(default = "default_weight_decay")]
    pub weight_decay: f64,
    /// Beta shape for the Mixup interpolation draw; only read when the
    /// method mixes.
    #[serde(default = "default_beta_mix")]
    pub beta_mix: f64,
    /// ARC settings; only read when the method uses ARC.
    #[serde(default)]
    pub arc: ArcConfig,
    #[serde(default = "default_eval_bins")]
    pub num_eval_bins: usize,
    /// Run seed. Required for `train`; grid runs derive one when absent.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Debug mode: drop the cross-entropy term and train on ARC alone.
    #[serde(default)]
    pub arc_only_debug: bool,
}

fn default_dataset() -> String {
    "overlap2d".into()
}

fn default_dataset_size() -> usize {
    8192
}

fn default_split() -> [f64; 3] {
    [0.8, 0.1, 0.1]
}

fn default_epochs() -> usize {
    200
}

fn default_batch_size() -> usize {
    128
}

fn default_momentum() -> f64 {
    0.9
}

fn default_weight_decay() -> f64 {
    5e-4
}

fn default_beta_mix() -> f64 {
    1.0
}

fn default_eval_bins() -> usize {
    15
}

impl ExperimentConfig {
    /// A config with the stock hyperparameters for the given method and
    /// network.
    pub fn new(method: Method, dataset: &str, layer_sizes: Vec<usize>) -> Self {
        ExperimentConfig {
            method,
            dataset: dataset.to_string(),
            dataset_size: default_dataset_size(),
            split: default_split(),
            layer_sizes,
            epochs: default_epochs(),
            batch_size: default_batch_size(),
            learning_rate: LrSchedule::default(),
            momentum: default_momentum(),
            weight_decay: default_weight_decay(),
            beta_mix: default_beta_mix(),
            arc: ArcConfig::default(),
            num_eval_bins: default_eval_bins(),
            seed: None,
            arc_only_debug: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 || self.layer_sizes.contains(&0) {
            return Err(Error::InvalidConfig(
                "layer_sizes needs at least two positive entries".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        let lr_ok = self.learning_rate.initial > 0.0 && self.learning_rate.decay_factor > 0.0;
        if !lr_ok {
            return Err(Error::InvalidConfig(
                "learning rate and decay factor must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig("momentum must lie in [0, 1)".into()));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::InvalidConfig("weight_decay must be nonnegative".into()));
        }
        if self.num_eval_bins == 0 {
            return Err(Error::InvalidConfig("num_eval_bins must be at least 1".into()));
        }
        if self.method.mixes() && (self.beta_mix <= 0.0 || self.beta_mix.is_nan()) {
            return Err(Error::InvalidConfig("beta_mix must be positive".into()));
        }
        if self.method.uses_arc() && self.arc.arc_weight < 0.0 {
            return Err(Error::InvalidConfig("arc_weight must be nonnegative".into()));
        }
        if self.arc_only_debug && !self.method.uses_arc() {
            return Err(Error::InvalidConfig(
                "arc_only_debug requires an ARC method".into(),
            ));
        }
        Ok(())
    }

    /// The run seed; errors when none was set.
    pub fn seed_or_err(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::InvalidConfig("no seed set: add `seed = <n>` or pass --seed".into())
        })
    }
}

/// Parses a single-run config file. Unknown keys are errors.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_experiment_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    parse_experiment_config(&std::fs::read_to_string(path)?)
}

/// One entry of a grid file: a config plus an optional replicate count.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub config: ExperimentConfig,
}

fn default_replicates() -> usize {
    1
}

/// A grid file: master seed plus run entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub master_seed: u64,
    #[serde(default)]
    pub runs: Vec<GridEntry>,
}

impl GridConfig {
    /// Expands entries into concrete runs. Run `i` of the expansion gets
    /// seed `derive_seed(master, i)` unless its entry pinned one explicitly.
    pub fn expand(&self, master_override: Option<u64>) -> Result<Vec<ExperimentConfig>> {
        if self.runs.is_empty() {
            return Err(Error::InvalidConfig("grid has no runs".into()));
        }
        let master = master_override.unwrap_or(self.master_seed);
        let mut out = Vec::new();
        for (entry_idx, entry) in self.runs.iter().enumerate() {
            if entry.replicates == 0 {
                return Err(Error::InvalidConfig(format!(
                    "run {entry_idx}: replicates must be at least 1"
                )));
            }
            if entry.replicates > 1 && entry.config.seed.is_some() {
                return Err(Error::InvalidConfig(format!(
                    "run {entry_idx}: a pinned seed with replicates > 1 would repeat \
                     identical runs"
                )));
            }
            entry.config.validate()?;
            for _ in 0..entry.replicates {
                let index = out.len() as u64;
                let mut config = entry.config.clone();
                config.seed = Some(config.seed.unwrap_or_else(|| derive_seed(master, index)));
                out.push(config);
            }
        }
        Ok(out)
    }
}

pub fn parse_grid_config(text: &str) -> Result<GridConfig> {
    toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
}

pub fn load_grid_config(path: impl AsRef<Path>) -> Result<GridConfig> {
    parse_grid_config(&std::fs::read_to_string(path)?)
}

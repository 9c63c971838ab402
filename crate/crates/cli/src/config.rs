//! Run configuration: defaults, JSON loading, validation and hashing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tabx_core::data::{Task, ADHD200_CLASS_COUNTS};
use tabx_core::explain::{PfiMetric, DEFAULT_SHAP_SAMPLES};
use tabx_core::select::DEFAULT_THRESHOLD;
use tabx_core::zoo::{BoostConfig, ModelKind, ZooSettings};

use crate::error::{CliError, Result};

/// Keyword for the built-in synthetic data source.
pub const SYNTH_SOURCE: &str = "synth";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    /// `"synth"` or a comma-separated list of CSV paths, merged in order.
    pub data: String,
    pub seed: u64,
    /// Training share of the split; `None` picks the task default.
    pub train_frac: Option<f64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub validation_fraction: f64,
    pub learning_rate: f64,
    pub correlation_threshold: f64,
    pub excluded_features: Vec<String>,
    pub models: Vec<ModelKind>,
    /// Models to explain; `None` explains every trained model.
    pub explain_models: Option<Vec<ModelKind>>,
    pub shap_samples: usize,
    pub background_size: usize,
    pub top_k: usize,
    pub pfi_repeats: usize,
    pub pfi_metric: PfiMetric,
    pub n_trees: usize,
    pub boost: BoostConfig,
    pub synth_counts: [usize; 4],
}

impl Default for RunConfig {
    fn default() -> Self {
        let zoo = ZooSettings::default();
        Self {
            task: Task::Binary,
            data: SYNTH_SOURCE.to_string(),
            seed: 42,
            train_frac: None,
            epochs: zoo.epochs,
            batch_size: zoo.batch_size,
            validation_fraction: zoo.validation_fraction,
            learning_rate: zoo.learning_rate,
            correlation_threshold: DEFAULT_THRESHOLD,
            excluded_features: Vec::new(),
            models: ModelKind::ALL.to_vec(),
            explain_models: None,
            shap_samples: DEFAULT_SHAP_SAMPLES,
            background_size: 50,
            top_k: 5,
            pfi_repeats: 10,
            pfi_metric: PfiMetric::Accuracy,
            n_trees: zoo.n_trees,
            boost: zoo.boost,
            synth_counts: ADHD200_CLASS_COUNTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataSource {
    Synth,
    Csv(Vec<PathBuf>),
}

impl RunConfig {
    pub fn for_task(task: Task) -> Self {
        Self {
            task,
            ..Self::default()
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is serializable")
    }

    /// Fills in defaults that depend on other fields.
    pub fn resolved(mut self) -> Self {
        self.train_frac
            .get_or_insert(self.task.default_train_frac());
        self
    }

    pub fn train_frac(&self) -> f64 {
        self.train_frac
            .unwrap_or_else(|| self.task.default_train_frac())
    }

    pub fn source(&self) -> DataSource {
        if self.data.trim().eq_ignore_ascii_case(SYNTH_SOURCE) {
            DataSource::Synth
        } else {
            DataSource::Csv(
                self.data
                    .split(',')
                    .map(|p| PathBuf::from(p.trim()))
                    .collect(),
            )
        }
    }

    /// Models to explain, in training order.
    pub fn explained(&self) -> Vec<ModelKind> {
        match &self.explain_models {
            None => self.models.clone(),
            Some(list) => self
                .models
                .iter()
                .copied()
                .filter(|k| list.contains(k))
                .collect(),
        }
    }

    pub fn zoo_settings(&self) -> ZooSettings {
        ZooSettings {
            epochs: self.epochs,
            batch_size: self.batch_size,
            validation_fraction: self.validation_fraction,
            learning_rate: self.learning_rate,
            n_trees: self.n_trees,
            boost: self.boost.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.models.is_empty() {
            return fail("model list is empty".into());
        }
        for (i, k) in self.models.iter().enumerate() {
            if self.models[..i].contains(k) {
                return fail(format!("model {k} listed twice"));
            }
        }
        let frac = self.train_frac();
        if !(frac > 0.0 && frac < 1.0) {
            return fail(format!("train_frac {frac} outside (0, 1)"));
        }
        if !(self.correlation_threshold > 0.0 && self.correlation_threshold <= 1.0) {
            return fail(format!(
                "correlation_threshold {} outside (0, 1]",
                self.correlation_threshold
            ));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return fail("epochs and batch_size must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return fail(format!(
                "validation_fraction {} outside [0, 1)",
                self.validation_fraction
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            ));
        }
        if self.background_size == 0 || self.pfi_repeats == 0 || self.top_k == 0 {
            return fail("background_size, pfi_repeats and top_k must be at least 1".into());
        }
        if self.n_trees == 0 {
            return fail("n_trees must be at least 1".into());
        }
        if self.source() == DataSource::Synth && self.synth_counts.contains(&0) {
            return fail("every synthetic class count must be at least 1".into());
        }
        if self.data.trim().is_empty() {
            return fail("data source is empty".into());
        }
        Ok(())
    }

    /// SHA-256 of the compact JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config is serializable");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Parses a comma-separated model list such as `RF,EXGB,HyExDNN-RNN`;
/// `all` selects every kind.
pub fn parse_models(s: &str) -> Result<Vec<ModelKind>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(ModelKind::ALL.to_vec());
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.parse()
                .map_err(|e: tabx_core::zoo::ZooError| CliError::Config(e.to_string()))
        })
        .collect()
}

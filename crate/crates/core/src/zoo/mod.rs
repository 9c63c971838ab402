//! The eight classifiers behind one predict-probabilities contract.

mod arch;
mod ensemble;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use arch::{
    build_hyexdnn_rnn, build_hyexdnn_rnn_with_widths, build_variant, head, head_loss, DROPOUT_RATE,
    HYEXDNN_WIDTHS,
};
pub use ensemble::{grow_tree, log_loss, tree_proba, BoostConfig, Boosted, Forest};
pub use tree::{Node, Tree};

use crate::matrix::Matrix;
use crate::nn::{self, NeuralCheckpoint, NnError, TrainConfig, TrainingHistory};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZooError {
    #[error("unknown model kind: {0}")]
    UnknownKind(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "RF")]
    Rf,
    #[serde(rename = "DT")]
    Dt,
    #[serde(rename = "EXGB")]
    Exgb,
    #[serde(rename = "LSTM")]
    Lstm,
    #[serde(rename = "DNN")]
    Dnn,
    #[serde(rename = "LSTM-GRU")]
    LstmGru,
    #[serde(rename = "LSTM-RNN")]
    LstmRnn,
    #[serde(rename = "HyExDNN-RNN")]
    HyExDnnRnn,
}

impl ModelKind {
    /// Every kind, in the order results are tabulated.
    pub const ALL: [ModelKind; 8] = [
        ModelKind::Rf,
        ModelKind::Dt,
        ModelKind::Exgb,
        ModelKind::Lstm,
        ModelKind::Dnn,
        ModelKind::LstmGru,
        ModelKind::LstmRnn,
        ModelKind::HyExDnnRnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Rf => "RF",
            ModelKind::Dt => "DT",
            ModelKind::Exgb => "EXGB",
            ModelKind::Lstm => "LSTM",
            ModelKind::Dnn => "DNN",
            ModelKind::LstmGru => "LSTM-GRU",
            ModelKind::LstmRnn => "LSTM-RNN",
            ModelKind::HyExDnnRnn => "HyExDNN-RNN",
        }
    }

    pub fn is_neural(self) -> bool {
        !matches!(self, ModelKind::Rf | ModelKind::Dt | ModelKind::Exgb)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ZooError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| ZooError::UnknownKind(t.to_string()))
    }
}

/// Trained state behind a [`FittedModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TrainedState {
    Neural(NeuralCheckpoint),
    Tree(Tree),
    Forest(Forest),
    Boosted(Boosted),
}

pub const MODEL_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub format_version: u32,
    pub kind: ModelKind,
    pub n_classes: usize,
    pub feature_names: Vec<String>,
    pub state: TrainedState,
}

/// Settings shared by the training harness; tree hyperparameters are fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZooSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub validation_fraction: f64,
    pub learning_rate: f64,
    pub n_trees: usize,
    pub boost: BoostConfig,
}

impl Default for ZooSettings {
    fn default() -> Self {
        Self {
            epochs: 120,
            batch_size: 32,
            validation_fraction: 0.2,
            learning_rate: 1e-3,
            n_trees: 100,
            boost: BoostConfig::default(),
        }
    }
}

fn check_xy(x: &Matrix, y: &[usize], n_classes: usize) -> Result<(), ZooError> {
    if x.rows() == 0 {
        return Err(ZooError::InvalidInput("no training rows".into()));
    }
    if x.rows() != y.len() {
        return Err(ZooError::ShapeMismatch(format!(
            "{} rows but {} labels",
            x.rows(),
            y.len()
        )));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(ZooError::InvalidInput(format!(
            "label {bad} with {n_classes} classes"
        )));
    }
    Ok(())
}

impl FittedModel {
    fn wrap(
        kind: ModelKind,
        n_classes: usize,
        feature_names: &[String],
        state: TrainedState,
    ) -> Self {
        Self {
            format_version: MODEL_FORMAT,
            kind,
            n_classes,
            feature_names: feature_names.to_vec(),
            state,
        }
    }

    pub fn fit_tree(
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        feature_names: &[String],
        max_depth: Option<usize>,
        min_samples_split: usize,
    ) -> Result<Self, ZooError> {
        check_xy(x, y, n_classes)?;
        let tree = grow_tree(x, y, n_classes, max_depth, min_samples_split);
        Ok(Self::wrap(
            ModelKind::Dt,
            n_classes,
            feature_names,
            TrainedState::Tree(tree),
        ))
    }

    pub fn fit_forest(
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        feature_names: &[String],
        n_trees: usize,
        seed: u64,
    ) -> Result<Self, ZooError> {
        check_xy(x, y, n_classes)?;
        let forest = Forest::fit(x, y, n_classes, n_trees, seed);
        Ok(Self::wrap(
            ModelKind::Rf,
            n_classes,
            feature_names,
            TrainedState::Forest(forest),
        ))
    }

    pub fn fit_gboost(
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        feature_names: &[String],
        config: &BoostConfig,
    ) -> Result<Self, ZooError> {
        check_xy(x, y, n_classes)?;
        let model = Boosted::fit(x, y, n_classes, config);
        Ok(Self::wrap(
            ModelKind::Exgb,
            n_classes,
            feature_names,
            TrainedState::Boosted(model),
        ))
    }

    /// Trains the stack of `kind` with the matching head and loss.
    pub fn train_neural(
        kind: ModelKind,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        feature_names: &[String],
        config: &TrainConfig,
    ) -> Result<(Self, TrainingHistory), ZooError> {
        check_xy(x, y, n_classes)?;
        let spec = build_variant(kind, x.cols(), n_classes)?;
        let config = TrainConfig {
            loss: head_loss(n_classes),
            ..config.clone()
        };
        let (params, history) = nn::fit(&spec, x, y, &config)?;
        let state = TrainedState::Neural(NeuralCheckpoint::new(spec, params));
        Ok((Self::wrap(kind, n_classes, feature_names, state), history))
    }

    /// Fits any kind with the harness defaults; neural kinds also return
    /// their training curves.
    pub fn train(
        kind: ModelKind,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        feature_names: &[String],
        settings: &ZooSettings,
        seed: u64,
    ) -> Result<(Self, Option<TrainingHistory>), ZooError> {
        match kind {
            ModelKind::Dt => Ok((
                Self::fit_tree(x, y, n_classes, feature_names, None, 2)?,
                None,
            )),
            ModelKind::Rf => Ok((
                Self::fit_forest(x, y, n_classes, feature_names, settings.n_trees, seed)?,
                None,
            )),
            ModelKind::Exgb => Ok((
                Self::fit_gboost(x, y, n_classes, feature_names, &settings.boost)?,
                None,
            )),
            _ => {
                let config = TrainConfig {
                    epochs: settings.epochs,
                    batch_size: settings.batch_size,
                    validation_fraction: settings.validation_fraction,
                    learning_rate: settings.learning_rate,
                    ..TrainConfig::new(head_loss(n_classes), seed)
                };
                let (m, h) = Self::train_neural(kind, x, y, n_classes, feature_names, &config)?;
                Ok((m, Some(h)))
            }
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Class probabilities, one row per input row; binary sigmoid outputs
    /// are expanded to `[1 - p, p]`.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix, ZooError> {
        if x.cols() != self.n_features() {
            return Err(ZooError::ShapeMismatch(format!(
                "model expects {} features, got {}",
                self.n_features(),
                x.cols()
            )));
        }
        if x.rows() == 0 {
            return Ok(Matrix::zeros(0, self.n_classes));
        }
        Ok(match &self.state {
            TrainedState::Tree(t) => tree_proba(t, x),
            TrainedState::Forest(f) => f.predict_proba(x),
            TrainedState::Boosted(b) => b.predict_proba(x),
            TrainedState::Neural(ck) => {
                let out = nn::predict(&ck.spec, &ck.params, std::slice::from_ref(x))?;
                if out.cols() == 1 {
                    let mut full = Matrix::zeros(out.rows(), 2);
                    for r in 0..out.rows() {
                        let p = out.get(r, 0);
                        full.row_mut(r).copy_from_slice(&[1.0 - p, p]);
                    }
                    full
                } else {
                    out
                }
            }
        })
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>, ZooError> {
        Ok(self.predict_proba(x)?.argmax_rows())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model is serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, ZooError> {
        let m: Self = serde_json::from_str(s).map_err(|e| ZooError::Checkpoint(e.to_string()))?;
        if m.format_version != MODEL_FORMAT {
            return Err(ZooError::Checkpoint(format!(
                "unsupported format version {}",
                m.format_version
            )));
        }
        if let TrainedState::Neural(ck) = &m.state {
            ck.validate()
                .map_err(|e| ZooError::Checkpoint(e.to_string()))?;
            if ck.spec.input_dim != m.n_features() {
                return Err(ZooError::Checkpoint(
                    "input width does not match feature names".into(),
                ));
            }
        }
        Ok(m)
    }
}

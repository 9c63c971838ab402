//! Small sequential neural-network engine: dense, Elman, LSTM and GRU
//! layers, dropout, cross-entropy losses, reverse-mode gradients, Adam, and
//! a finite-difference gradient checker.

mod activation;
mod adam;
mod gradcheck;
mod loss;
mod network;
mod params;
mod spec;
mod train;

use serde::{Deserialize, Serialize};

pub use activation::{sigmoid, softmax};
pub use adam::{adam_step, AdamState};
pub use gradcheck::{grad_check, loss_and_grads};
pub use loss::{cross_entropy, one_hot, LossKind, PROB_CLIP};
pub use network::{backward, forward, predict, ForwardCache, OutputGrad};
pub use params::ParameterBlock;
pub use spec::{Activation, LayerSpec, NeuralSpec};
pub use train::{fit, predicted_classes, TrainConfig, TrainingHistory};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid layer spec: {0}")]
    InvalidSpec(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("cache does not belong to the current parameters")]
    StaleCache,
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("non-finite loss {loss} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        loss: f64,
    },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

pub const CHECKPOINT_FORMAT: u32 = 1;

/// Versioned JSON checkpoint of a layer stack and its weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralCheckpoint {
    pub format_version: u32,
    pub spec: NeuralSpec,
    pub params: ParameterBlock,
}

impl NeuralCheckpoint {
    pub fn new(spec: NeuralSpec, params: ParameterBlock) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT,
            spec,
            params,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint is serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, NnError> {
        let ck: Self = serde_json::from_str(s).map_err(|e| NnError::Checkpoint(e.to_string()))?;
        ck.validate()?;
        Ok(ck)
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.format_version != CHECKPOINT_FORMAT {
            return Err(NnError::Checkpoint(format!(
                "unsupported format version {}",
                self.format_version
            )));
        }
        self.spec.validate()?;
        if !self
            .params
            .same_shape(&ParameterBlock::zeros_for(&self.spec))
        {
            return Err(NnError::Checkpoint(
                "parameter shapes do not match spec".into(),
            ));
        }
        if !self.params.is_finite() {
            return Err(NnError::Checkpoint("non-finite weights".into()));
        }
        Ok(())
    }
}

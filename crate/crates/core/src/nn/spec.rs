use serde::{Deserialize, Serialize};

use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Softmax,
    Linear,
}

/// One layer of a sequential stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Dense {
        units: usize,
        activation: Activation,
    },
    /// Elman cell: `h = tanh(x·W + h_prev·U + b)`.
    SimpleRnn {
        units: usize,
        return_sequences: bool,
    },
    /// Four-gate LSTM, gate order input, forget, candidate, output.
    Lstm {
        units: usize,
        return_sequences: bool,
    },
    /// Three-gate GRU with the reset gate applied before the candidate
    /// projection; gate order update, reset, candidate.
    Gru {
        units: usize,
        return_sequences: bool,
    },
    /// Inverted dropout: scales kept units by `1/(1-rate)` while training.
    Dropout {
        rate: f64,
    },
    Activation {
        activation: Activation,
    },
}

impl LayerSpec {
    pub fn dense(units: usize, activation: Activation) -> Self {
        LayerSpec::Dense { units, activation }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::SimpleRnn { .. } => "simple_rnn",
            LayerSpec::Lstm { .. } => "lstm",
            LayerSpec::Gru { .. } => "gru",
            LayerSpec::Dropout { .. } => "dropout",
            LayerSpec::Activation { .. } => "activation",
        }
    }

    pub fn units(&self) -> Option<usize> {
        match *self {
            LayerSpec::Dense { units, .. }
            | LayerSpec::SimpleRnn { units, .. }
            | LayerSpec::Lstm { units, .. }
            | LayerSpec::Gru { units, .. } => Some(units),
            _ => None,
        }
    }

    pub fn is_recurrent(&self) -> bool {
        matches!(
            self,
            LayerSpec::SimpleRnn { .. } | LayerSpec::Lstm { .. } | LayerSpec::Gru { .. }
        )
    }

    /// Number of stacked gate blocks in the weight matrices.
    pub(crate) fn gates(&self) -> usize {
        match self {
            LayerSpec::Lstm { .. } => 4,
            LayerSpec::Gru { .. } => 3,
            _ => 1,
        }
    }

    /// Shapes of the trainable tensors given the input width.
    pub fn param_shapes(&self, input_dim: usize) -> Vec<(usize, usize)> {
        match *self {
            LayerSpec::Dense { units, .. } => vec![(input_dim, units), (1, units)],
            LayerSpec::SimpleRnn { units, .. }
            | LayerSpec::Lstm { units, .. }
            | LayerSpec::Gru { units, .. } => {
                let g = self.gates();
                vec![(input_dim, g * units), (units, g * units), (1, g * units)]
            }
            LayerSpec::Dropout { .. } | LayerSpec::Activation { .. } => vec![],
        }
    }

    fn output_dim(&self, input_dim: usize) -> usize {
        self.units().unwrap_or(input_dim)
    }
}

/// Input width plus the layer chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralSpec {
    pub input_dim: usize,
    pub layers: Vec<LayerSpec>,
}

impl NeuralSpec {
    pub fn new(input_dim: usize, layers: Vec<LayerSpec>) -> Result<Self, NnError> {
        let spec = Self { input_dim, layers };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.input_dim == 0 {
            return Err(NnError::InvalidSpec("input_dim must be at least 1".into()));
        }
        if self.layers.is_empty() {
            return Err(NnError::InvalidSpec("no layers".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.units() == Some(0) {
                return Err(NnError::InvalidSpec(format!(
                    "layer {i}: units must be at least 1"
                )));
            }
            if let LayerSpec::Dropout { rate } = *l {
                if !(0.0..1.0).contains(&rate) {
                    return Err(NnError::InvalidSpec(format!(
                        "layer {i}: dropout rate {rate} outside [0, 1)"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Input width of each layer.
    pub fn input_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.layers.len());
        let mut d = self.input_dim;
        for l in &self.layers {
            dims.push(d);
            d = l.output_dim(d);
        }
        dims
    }

    pub fn output_dim(&self) -> usize {
        self.layers
            .iter()
            .fold(self.input_dim, |d, l| l.output_dim(d))
    }

    /// Activation applied last, looking through dropout layers.
    pub fn head_activation(&self) -> Activation {
        for l in self.layers.iter().rev() {
            match *l {
                LayerSpec::Dense { activation, .. } | LayerSpec::Activation { activation } => {
                    return activation
                }
                LayerSpec::Dropout { .. } => continue,
                _ => return Activation::Tanh,
            }
        }
        Activation::Linear
    }

    pub fn param_shapes(&self) -> Vec<Vec<(usize, usize)>> {
        self.layers
            .iter()
            .zip(self.input_dims())
            .map(|(l, d)| l.param_shapes(d))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.param_shapes()
            .iter()
            .flatten()
            .map(|(r, c)| r * c)
            .sum()
    }

    /// Per-layer parameter counts, for summaries.
    pub fn layer_param_counts(&self) -> Vec<usize> {
        self.param_shapes()
            .iter()
            .map(|s| s.iter().map(|(r, c)| r * c).sum())
            .collect()
    }
}

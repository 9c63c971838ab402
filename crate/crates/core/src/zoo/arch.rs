use super::{ModelKind, ZooError};
use crate::nn::{Activation, LayerSpec, LossKind, NeuralSpec};

/// Layer widths of the hybrid stack: two dense layers, two Elman layers,
/// and the dense layer before the head.
pub const HYEXDNN_WIDTHS: [usize; 5] = [256, 128, 64, 32, 16];

pub const DROPOUT_RATE: f64 = 0.5;

/// One sigmoid unit for two classes, otherwise a softmax over all classes.
pub fn head(n_classes: usize) -> LayerSpec {
    if n_classes == 2 {
        LayerSpec::dense(1, Activation::Sigmoid)
    } else {
        LayerSpec::dense(n_classes, Activation::Softmax)
    }
}

/// Loss matching [`head`].
pub fn head_loss(n_classes: usize) -> LossKind {
    if n_classes == 2 {
        LossKind::BinaryCe
    } else {
        LossKind::CategoricalCe
    }
}

pub fn build_hyexdnn_rnn(input_dim: usize, n_classes: usize) -> Result<NeuralSpec, ZooError> {
    build_hyexdnn_rnn_with_widths(input_dim, n_classes, HYEXDNN_WIDTHS)
}

/// The hybrid stack with custom widths, e.g. a toy-sized copy for
/// gradient checking.
pub fn build_hyexdnn_rnn_with_widths(
    input_dim: usize,
    n_classes: usize,
    w: [usize; 5],
) -> Result<NeuralSpec, ZooError> {
    check_classes(n_classes)?;
    let layers = vec![
        LayerSpec::dense(w[0], Activation::Relu),
        LayerSpec::dense(w[1], Activation::Relu),
        LayerSpec::Dropout { rate: DROPOUT_RATE },
        LayerSpec::SimpleRnn {
            units: w[2],
            return_sequences: true,
        },
        LayerSpec::Dropout { rate: DROPOUT_RATE },
        LayerSpec::SimpleRnn {
            units: w[3],
            return_sequences: false,
        },
        LayerSpec::dense(w[4], Activation::Relu),
        head(n_classes),
    ];
    Ok(NeuralSpec::new(input_dim, layers)?)
}

/// Layer stack for any neural kind. The comparison variants keep the hybrid
/// skeleton and swap in the named cell types.
pub fn build_variant(
    kind: ModelKind,
    input_dim: usize,
    n_classes: usize,
) -> Result<NeuralSpec, ZooError> {
    check_classes(n_classes)?;
    let dense = |u| LayerSpec::dense(u, Activation::Relu);
    let layers = match kind {
        ModelKind::HyExDnnRnn => return build_hyexdnn_rnn(input_dim, n_classes),
        ModelKind::Dnn => vec![
            dense(256),
            dense(128),
            LayerSpec::Dropout { rate: DROPOUT_RATE },
            dense(16),
        ],
        ModelKind::Lstm => vec![
            LayerSpec::Lstm {
                units: 64,
                return_sequences: true,
            },
            LayerSpec::Dropout { rate: DROPOUT_RATE },
            LayerSpec::Lstm {
                units: 32,
                return_sequences: false,
            },
            dense(16),
        ],
        ModelKind::LstmGru => vec![
            LayerSpec::Lstm {
                units: 64,
                return_sequences: true,
            },
            LayerSpec::Gru {
                units: 32,
                return_sequences: false,
            },
            dense(16),
        ],
        ModelKind::LstmRnn => vec![
            LayerSpec::Lstm {
                units: 64,
                return_sequences: true,
            },
            LayerSpec::SimpleRnn {
                units: 32,
                return_sequences: false,
            },
            dense(16),
        ],
        other => return Err(ZooError::UnknownKind(format!("{other} has no layer stack"))),
    };
    let mut layers = layers;
    layers.push(head(n_classes));
    Ok(NeuralSpec::new(input_dim, layers)?)
}

fn check_classes(n_classes: usize) -> Result<(), ZooError> {
    if n_classes < 2 {
        return Err(ZooError::InvalidInput(format!(
            "need at least 2 classes, got {n_classes}"
        )));
    }
    Ok(())
}

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::gradcheck::loss_and_grads;
use super::loss::{cross_entropy, one_hot};
use super::network::predict;
use super::{adam_step, AdamState, LossKind, NeuralSpec, NnError, ParameterBlock};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Share of the (seeded-shuffled) training rows held out for validation.
    pub validation_fraction: f64,
    pub seed: u64,
    pub loss: LossKind,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    /// Element-wise gradient clip applied before each Adam step.
    #[serde(default = "default_clip")]
    pub grad_clip: f64,
}

fn default_lr() -> f64 {
    1e-3
}

fn default_clip() -> f64 {
    5.0
}

impl TrainConfig {
    pub fn new(loss: LossKind, seed: u64) -> Self {
        Self {
            epochs: 120,
            batch_size: 32,
            validation_fraction: 0.2,
            seed,
            loss,
            learning_rate: default_lr(),
            grad_clip: default_clip(),
        }
    }

    fn validate(&self) -> Result<(), NnError> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(NnError::InvalidConfig(
                "epochs and batch_size must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(NnError::InvalidConfig(format!(
                "validation_fraction {} outside [0, 1)",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

/// Per-epoch curves, measured in inference mode after each epoch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub train_loss: Vec<f64>,
    pub train_accuracy: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub val_accuracy: Vec<f64>,
}

impl TrainingHistory {
    pub fn epochs(&self) -> usize {
        self.train_loss.len()
    }
}

/// Class predicted by each output row (threshold 0.5 for a single sigmoid unit).
pub fn predicted_classes(out: &Matrix) -> Vec<usize> {
    if out.cols() == 1 {
        out.as_slice()
            .iter()
            .map(|&p| usize::from(p >= 0.5))
            .collect()
    } else {
        out.argmax_rows()
    }
}

/// Minibatch Adam training from a fresh seeded initialization.
///
/// The last `validation_fraction` of a seeded shuffle is held out. When no
/// rows are held out, validation curves are measured on the training part.
pub fn fit(
    spec: &NeuralSpec,
    x: &Matrix,
    labels: &[usize],
    config: &TrainConfig,
) -> Result<(ParameterBlock, TrainingHistory), NnError> {
    config.validate()?;
    spec.validate()?;
    if x.rows() != labels.len() || x.rows() == 0 {
        return Err(NnError::ShapeMismatch(format!(
            "{} rows but {} labels",
            x.rows(),
            labels.len()
        )));
    }
    let width = spec.output_dim();
    let n_classes = if width == 1 { 2 } else { width };
    if let Some(&bad) = labels.iter().find(|&&y| y >= n_classes) {
        return Err(NnError::ShapeMismatch(format!(
            "label {bad} does not fit a {width}-wide head"
        )));
    }
    let targets = one_hot(labels, width);

    let mut order: Vec<usize> = (0..x.rows()).collect();
    order.shuffle(&mut rng::substream(config.seed, 0));
    let n_val = (x.rows() as f64 * config.validation_fraction).floor() as usize;
    let n_train = x.rows() - n_val;
    if n_train == 0 {
        return Err(NnError::InvalidConfig(
            "validation split leaves no training rows".into(),
        ));
    }
    let train_idx = order[..n_train].to_vec();
    let val_idx = if n_val == 0 {
        train_idx.clone()
    } else {
        order[n_train..].to_vec()
    };
    let (x_tr, t_tr) = (x.select_rows(&train_idx), targets.select_rows(&train_idx));
    let (x_val, t_val) = (x.select_rows(&val_idx), targets.select_rows(&val_idx));
    let (y_tr, y_val): (Vec<usize>, Vec<usize>) = (
        train_idx.iter().map(|&i| labels[i]).collect(),
        val_idx.iter().map(|&i| labels[i]).collect(),
    );

    let mut params = ParameterBlock::init(spec, rng::derive_seed(config.seed, 1));
    let mut adam = AdamState::with_hyper(&params, config.learning_rate, 0.9, 0.999, 1e-8);
    let mut history = TrainingHistory::default();

    for epoch in 0..config.epochs {
        let mut shuffle_rng = rng::substream(config.seed, 2 * epoch as u64 + 2);
        let mut dropout_rng = rng::substream(config.seed, 2 * epoch as u64 + 3);
        let mut batch_order: Vec<usize> = (0..n_train).collect();
        batch_order.shuffle(&mut shuffle_rng);
        for (b, chunk) in batch_order.chunks(config.batch_size).enumerate() {
            let xb = x_tr.select_rows(chunk);
            let tb = t_tr.select_rows(chunk);
            let (loss, mut grads, _) = loss_and_grads(
                spec,
                &params,
                std::slice::from_ref(&xb),
                &tb,
                config.loss,
                true,
                &mut dropout_rng,
            )?;
            if !loss.is_finite() {
                return Err(NnError::NonFiniteLoss {
                    epoch,
                    batch: b,
                    loss,
                });
            }
            grads.clip(config.grad_clip);
            adam_step(&mut params, &grads, &mut adam)?;
        }
        let (tl, ta) = evaluate(spec, &params, &x_tr, &t_tr, &y_tr, config.loss)?;
        let (vl, va) = evaluate(spec, &params, &x_val, &t_val, &y_val, config.loss)?;
        if !tl.is_finite() || !vl.is_finite() {
            return Err(NnError::NonFiniteLoss {
                epoch,
                batch: usize::MAX,
                loss: if tl.is_finite() { vl } else { tl },
            });
        }
        history.train_loss.push(tl);
        history.train_accuracy.push(ta);
        history.val_loss.push(vl);
        history.val_accuracy.push(va);
    }
    Ok((params, history))
}

fn evaluate(
    spec: &NeuralSpec,
    params: &ParameterBlock,
    x: &Matrix,
    targets: &Matrix,
    labels: &[usize],
    loss: LossKind,
) -> Result<(f64, f64), NnError> {
    let out = predict(spec, params, std::slice::from_ref(x))?;
    let (l, _) = cross_entropy(&out, targets, loss)?;
    let correct = predicted_classes(&out)
        .iter()
        .zip(labels)
        .filter(|(p, y)| p == y)
        .count();
    Ok((l, correct as f64 / labels.len() as f64))
}

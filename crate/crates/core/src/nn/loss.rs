use serde::{Deserialize, Serialize};

use super::NnError;
use crate::matrix::Matrix;

pub const PROB_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Per-column Bernoulli likelihood, paired with a sigmoid head.
    BinaryCe,
    /// Multinomial likelihood over one-hot rows, paired with a softmax head.
    CategoricalCe,
}

/// Mean-over-rows cross-entropy and its gradient with respect to `probs`.
/// Probabilities are clipped to `[1e-12, 1 - 1e-12]` before the log.
pub fn cross_entropy(
    probs: &Matrix,
    targets: &Matrix,
    kind: LossKind,
) -> Result<(f64, Matrix), NnError> {
    if probs.shape() != targets.shape() {
        return Err(NnError::ShapeMismatch(format!(
            "probabilities {:?} vs targets {:?}",
            probs.shape(),
            targets.shape()
        )));
    }
    let n = probs.rows().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(probs.rows(), probs.cols());
    for ((&p, &t), g) in probs
        .as_slice()
        .iter()
        .zip(targets.as_slice())
        .zip(grad.as_mut_slice())
    {
        let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
        match kind {
            LossKind::CategoricalCe => {
                loss -= t * p.ln();
                *g = -t / p / n;
            }
            LossKind::BinaryCe => {
                loss -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
                *g = (-t / p + (1.0 - t) / (1.0 - p)) / n;
            }
        }
    }
    Ok((loss / n, grad))
}

/// One-hot rows for class indices; a single column of 0/1 when `width == 1`.
pub fn one_hot(labels: &[usize], width: usize) -> Matrix {
    let mut m = Matrix::zeros(labels.len(), width);
    for (r, &y) in labels.iter().enumerate() {
        if width == 1 {
            m.set(r, 0, y as f64);
        } else {
            m.set(r, y, 1.0);
        }
    }
    m
}

use super::loss::cross_entropy;
use super::network::{backward, forward, OutputGrad};
use super::{Activation, LayerSpec, LossKind, NeuralSpec, NnError, ParameterBlock};
use crate::matrix::Matrix;
use crate::rng::{self, Stream};

/// Loss, parameter gradients and output probabilities for one batch.
///
/// When the head pairs softmax with categorical CE (or sigmoid with binary
/// CE) the gradient enters at the logits as `(p - t) / n`; otherwise it is
/// pushed through the head Jacobian.
pub fn loss_and_grads(
    spec: &NeuralSpec,
    params: &ParameterBlock,
    inputs: &[Matrix],
    targets: &Matrix,
    loss: LossKind,
    training: bool,
    rng: &mut Stream,
) -> Result<(f64, ParameterBlock, Matrix), NnError> {
    let (probs, cache) = forward(spec, params, inputs, training, rng)?;
    let (value, grad) = cross_entropy(&probs, targets, loss)?;
    let fused = matches!(
        (spec.layers.last(), loss),
        (
            Some(
                LayerSpec::Dense {
                    activation: Activation::Softmax,
                    ..
                } | LayerSpec::Activation {
                    activation: Activation::Softmax
                }
            ),
            LossKind::CategoricalCe
        ) | (
            Some(
                LayerSpec::Dense {
                    activation: Activation::Sigmoid,
                    ..
                } | LayerSpec::Activation {
                    activation: Activation::Sigmoid
                }
            ),
            LossKind::BinaryCe
        )
    );
    let upstream = if fused {
        let n = probs.rows().max(1) as f64;
        let mut g = probs.clone();
        for (v, t) in g.as_mut_slice().iter_mut().zip(targets.as_slice()) {
            *v = (*v - t) / n;
        }
        OutputGrad::Logits(g)
    } else {
        OutputGrad::Probs(grad)
    };
    let grads = backward(spec, params, &cache, upstream)?;
    Ok((value, grads, probs))
}

fn loss_only(
    spec: &NeuralSpec,
    params: &ParameterBlock,
    inputs: &[Matrix],
    targets: &Matrix,
    loss: LossKind,
    dropout_seed: u64,
) -> Result<f64, NnError> {
    let (probs, _) = forward(spec, params, inputs, true, &mut rng::stream(dropout_seed))?;
    Ok(cross_entropy(&probs, targets, loss)?.0)
}

/// Largest relative error between analytic gradients and central finite
/// differences, `|a - n| / max(|a|, |n|, 1e-8)`. Every evaluation reseeds
/// the dropout stream with `dropout_seed`, so masks are identical across
/// the perturbed passes.
pub fn grad_check(
    spec: &NeuralSpec,
    params: &ParameterBlock,
    inputs: &[Matrix],
    targets: &Matrix,
    loss: LossKind,
    eps: f64,
    dropout_seed: u64,
) -> Result<f64, NnError> {
    let (_, analytic, _) = loss_and_grads(
        spec,
        params,
        inputs,
        targets,
        loss,
        true,
        &mut rng::stream(dropout_seed),
    )?;
    let analytic = analytic.flatten();
    let mut probe = params.clone();
    let base = params.flatten();
    let mut worst: f64 = 0.0;
    for (k, (&theta, &a)) in base.iter().zip(&analytic).enumerate() {
        probe.set_flat(k, theta + eps);
        let plus = loss_only(spec, &probe, inputs, targets, loss, dropout_seed)?;
        probe.set_flat(k, theta - eps);
        let minus = loss_only(spec, &probe, inputs, targets, loss, dropout_seed)?;
        probe.set_flat(k, theta);
        let numeric = (plus - minus) / (2.0 * eps);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}

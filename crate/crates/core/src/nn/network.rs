//! Forward and reverse passes over a sequential layer stack.
//!
//! Activations flow as sequences of `n × width` matrices, one per timestep.
//! A tabular batch enters as a length-1 sequence, so a recurrent layer sees
//! each row as a single timestep and backprop-through-time is one step deep.
//! Dense and activation layers act on every timestep independently. The
//! network output is the last timestep of the final layer.

use rand::Rng;

use super::activation::{apply, backprop, sigmoid};
use super::{Activation, LayerSpec, NeuralSpec, NnError, ParameterBlock};
use crate::matrix::Matrix;
use crate::rng::Stream;

#[derive(Debug, Clone)]
enum LayerCache {
    Dense {
        inputs: Vec<Matrix>,
        outputs: Vec<Matrix>,
    },
    Activation {
        outputs: Vec<Matrix>,
    },
    Dropout {
        masks: Option<Vec<Matrix>>,
    },
    SimpleRnn {
        inputs: Vec<Matrix>,
        hs: Vec<Matrix>,
    },
    Lstm {
        inputs: Vec<Matrix>,
        hs: Vec<Matrix>,
        cs: Vec<Matrix>,
        gates: Vec<Matrix>,
        tanh_c: Vec<Matrix>,
    },
    Gru {
        inputs: Vec<Matrix>,
        hs: Vec<Matrix>,
        gates: Vec<Matrix>,
    },
}

/// Intermediates retained by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    layers: Vec<LayerCache>,
    final_steps: usize,
    rows: usize,
    training: bool,
}

impl ForwardCache {
    pub fn training(&self) -> bool {
        self.training
    }
}

/// Gradient arriving at the network output.
#[derive(Debug, Clone)]
pub enum OutputGrad {
    /// d loss / d output probabilities.
    Probs(Matrix),
    /// d loss / d pre-activation of a softmax or sigmoid head; skips the
    /// head Jacobian (the fused cross-entropy shortcut).
    Logits(Matrix),
}

pub fn forward(
    spec: &NeuralSpec,
    params: &ParameterBlock,
    inputs: &[Matrix],
    training: bool,
    rng: &mut Stream,
) -> Result<(Matrix, ForwardCache), NnError> {
    let rows = check_inputs(spec, params, inputs)?;
    let mut seq = inputs.to_vec();
    let mut caches = Vec::with_capacity(spec.layers.len());
    for (layer, p) in spec.layers.iter().zip(&params.layers) {
        let (next, cache) = layer_forward(layer, p, seq, training, rng);
        seq = next;
        caches.push(cache);
    }
    let final_steps = seq.len();
    let out = seq.pop().expect("at least one timestep");
    Ok((
        out,
        ForwardCache {
            version: params.version,
            layers: caches,
            final_steps,
            rows,
            training,
        },
    ))
}

/// Inference-mode forward pass without retaining a cache.
pub fn predict(
    spec: &NeuralSpec,
    params: &ParameterBlock,
    inputs: &[Matrix],
) -> Result<Matrix, NnError> {
    check_inputs(spec, params, inputs)?;
    let mut seq = inputs.to_vec();
    let mut unused = crate::rng::stream(0);
    for (layer, p) in spec.layers.iter().zip(&params.layers) {
        seq = layer_forward(layer, p, seq, false, &mut unused).0;
    }
    Ok(seq.pop().expect("at least one timestep"))
}

fn check_inputs(
    spec: &NeuralSpec,
    params: &ParameterBlock,
    inputs: &[Matrix],
) -> Result<usize, NnError> {
    let first = inputs
        .first()
        .ok_or_else(|| NnError::ShapeMismatch("empty input sequence".into()))?;
    for x in inputs {
        if x.cols() != spec.input_dim || x.rows() != first.rows() {
            return Err(NnError::ShapeMismatch(format!(
                "input step {:?} does not match {} rows × {} features",
                x.shape(),
                first.rows(),
                spec.input_dim
            )));
        }
    }
    let expected = spec.param_shapes();
    let ok = params.layers.len() == expected.len()
        && params.layers.iter().zip(&expected).all(|(l, s)| {
            l.len() == s.len() && l.iter().zip(s).all(|(m, &(r, c))| m.shape() == (r, c))
        });
    if !ok {
        return Err(NnError::ShapeMismatch(
            "parameters do not match the layer specs".into(),
        ));
    }
    Ok(first.rows())
}

fn affine(x: &Matrix, w: &Matrix, b: &Matrix) -> Matrix {
    let mut z = x.matmul(w);
    z.add_row_vector(b.as_slice());
    z
}

fn layer_forward(
    layer: &LayerSpec,
    p: &[Matrix],
    seq: Vec<Matrix>,
    training: bool,
    rng: &mut Stream,
) -> (Vec<Matrix>, LayerCache) {
    match *layer {
        LayerSpec::Dense { activation, .. } => {
            let outputs: Vec<Matrix> = seq
                .iter()
                .map(|x| {
                    let mut z = affine(x, &p[0], &p[1]);
                    apply(activation, &mut z);
                    z
                })
                .collect();
            (
                outputs.clone(),
                LayerCache::Dense {
                    inputs: seq,
                    outputs,
                },
            )
        }
        LayerSpec::Activation { activation } => {
            let outputs: Vec<Matrix> = seq
                .into_iter()
                .map(|mut z| {
                    apply(activation, &mut z);
                    z
                })
                .collect();
            (outputs.clone(), LayerCache::Activation { outputs })
        }
        LayerSpec::Dropout { rate } => {
            if !training || rate == 0.0 {
                return (seq, LayerCache::Dropout { masks: None });
            }
            let keep = 1.0 - rate;
            let masks: Vec<Matrix> = seq
                .iter()
                .map(|x| {
                    let data = (0..x.rows() * x.cols())
                        .map(|_| {
                            if rng.random::<f64>() < keep {
                                1.0 / keep
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    Matrix::from_vec(x.rows(), x.cols(), data)
                })
                .collect();
            let out = seq.iter().zip(&masks).map(|(x, m)| x.hadamard(m)).collect();
            (out, LayerCache::Dropout { masks: Some(masks) })
        }
        LayerSpec::SimpleRnn {
            units,
            return_sequences,
        } => {
            let n = seq[0].rows();
            let mut hs = vec![Matrix::zeros(n, units)];
            for x in &seq {
                let mut a = affine(x, &p[0], &p[2]);
                a.add_assign(&hs.last().expect("h0").matmul(&p[1]));
                apply(Activation::Tanh, &mut a);
                hs.push(a);
            }
            let out = emit(&hs, return_sequences);
            (out, LayerCache::SimpleRnn { inputs: seq, hs })
        }
        LayerSpec::Lstm {
            units,
            return_sequences,
        } => {
            let n = seq[0].rows();
            let mut hs = vec![Matrix::zeros(n, units)];
            let mut cs = vec![Matrix::zeros(n, units)];
            let mut gates = Vec::with_capacity(seq.len());
            let mut tanh_c = Vec::with_capacity(seq.len());
            for x in &seq {
                let mut z = affine(x, &p[0], &p[2]);
                z.add_assign(&hs.last().expect("h0").matmul(&p[1]));
                for v in z.as_mut_slice().chunks_mut(4 * units) {
                    let (in_forget, rest) = v.split_at_mut(2 * units);
                    let (g, o) = rest.split_at_mut(units);
                    in_forget
                        .iter_mut()
                        .chain(o.iter_mut())
                        .for_each(|s| *s = sigmoid(*s));
                    g.iter_mut().for_each(|s| *s = s.tanh());
                }
                let c_prev = cs.last().expect("c0");
                let mut c = Matrix::zeros(n, units);
                let mut tc = Matrix::zeros(n, units);
                let mut h = Matrix::zeros(n, units);
                for r in 0..n {
                    let zr = z.row(r);
                    for k in 0..units {
                        let (i, f, g, o) =
                            (zr[k], zr[units + k], zr[2 * units + k], zr[3 * units + k]);
                        let cv = f * c_prev.get(r, k) + i * g;
                        let t = cv.tanh();
                        c.set(r, k, cv);
                        tc.set(r, k, t);
                        h.set(r, k, o * t);
                    }
                }
                gates.push(z);
                cs.push(c);
                tanh_c.push(tc);
                hs.push(h);
            }
            let out = emit(&hs, return_sequences);
            (
                out,
                LayerCache::Lstm {
                    inputs: seq,
                    hs,
                    cs,
                    gates,
                    tanh_c,
                },
            )
        }
        LayerSpec::Gru {
            units,
            return_sequences,
        } => {
            let n = seq[0].rows();
            let u_zr = p[1].col_block(0, 2 * units);
            let u_h = p[1].col_block(2 * units, units);
            let mut hs = vec![Matrix::zeros(n, units)];
            let mut gates = Vec::with_capacity(seq.len());
            for x in &seq {
                let h_prev = hs.last().expect("h0");
                let mut z = affine(x, &p[0], &p[2]);
                let hu = h_prev.matmul(&u_zr);
                for r in 0..n {
                    let (zr, hr) = (z.row_mut(r), hu.row(r));
                    for k in 0..2 * units {
                        zr[k] = sigmoid(zr[k] + hr[k]);
                    }
                }
                let mut rh = Matrix::zeros(n, units);
                for r in 0..n {
                    for k in 0..units {
                        rh.set(r, k, z.get(r, units + k) * h_prev.get(r, k));
                    }
                }
                let cand = rh.matmul(&u_h);
                let mut h = Matrix::zeros(n, units);
                for r in 0..n {
                    for k in 0..units {
                        let hh = (z.get(r, 2 * units + k) + cand.get(r, k)).tanh();
                        z.set(r, 2 * units + k, hh);
                        let upd = z.get(r, k);
                        h.set(r, k, upd * h_prev.get(r, k) + (1.0 - upd) * hh);
                    }
                }
                gates.push(z);
                hs.push(h);
            }
            let out = emit(&hs, return_sequences);
            (
                out,
                LayerCache::Gru {
                    inputs: seq,
                    hs,
                    gates,
                },
            )
        }
    }
}

fn emit(hs: &[Matrix], return_sequences: bool) -> Vec<Matrix> {
    if return_sequences {
        hs[1..].to_vec()
    } else {
        vec![hs.last().expect("final state").clone()]
    }
}

/// Parameter gradients for the pass recorded in `cache`.
pub fn backward(
    spec: &NeuralSpec,
    params: &ParameterBlock,
    cache: &ForwardCache,
    upstream: OutputGrad,
) -> Result<ParameterBlock, NnError> {
    if cache.version != params.version || cache.layers.len() != spec.layers.len() {
        return Err(NnError::StaleCache);
    }
    let (grad, logits) = match upstream {
        OutputGrad::Probs(g) => (g, false),
        OutputGrad::Logits(g) => (g, true),
    };
    if grad.rows() != cache.rows || grad.cols() != spec.output_dim() {
        return Err(NnError::ShapeMismatch(format!(
            "upstream gradient {:?}",
            grad.shape()
        )));
    }
    if logits {
        match spec.layers.last() {
            Some(LayerSpec::Dense {
                activation: Activation::Softmax | Activation::Sigmoid,
                ..
            })
            | Some(LayerSpec::Activation {
                activation: Activation::Softmax | Activation::Sigmoid,
            }) => {}
            _ => {
                return Err(NnError::InvalidSpec(
                    "logit gradients need a softmax or sigmoid head".into(),
                ))
            }
        }
    }

    let mut grads = ParameterBlock::zeros_for(spec);
    let mut dseq: Vec<Matrix> = (0..cache.final_steps)
        .map(|_| Matrix::zeros(grad.rows(), grad.cols()))
        .collect();
    *dseq.last_mut().expect("final step") = grad;

    let last = spec.layers.len() - 1;
    for (i, (layer, lc)) in spec.layers.iter().zip(&cache.layers).enumerate().rev() {
        let skip_act = logits && i == last;
        dseq = layer_backward(
            layer,
            &params.layers[i],
            lc,
            dseq,
            &mut grads.layers[i],
            skip_act,
        );
    }
    Ok(grads)
}

fn layer_backward(
    layer: &LayerSpec,
    p: &[Matrix],
    cache: &LayerCache,
    dseq: Vec<Matrix>,
    g: &mut [Matrix],
    skip_act: bool,
) -> Vec<Matrix> {
    match (layer, cache) {
        (LayerSpec::Dense { activation, .. }, LayerCache::Dense { inputs, outputs }) => inputs
            .iter()
            .zip(outputs)
            .zip(dseq)
            .map(|((x, y), dy)| {
                let dz = if skip_act {
                    dy
                } else {
                    backprop(*activation, y, &dy)
                };
                g[0].add_assign(&x.t_matmul(&dz));
                add_bias_grad(&mut g[1], &dz);
                dz.matmul_t(&p[0])
            })
            .collect(),
        (LayerSpec::Activation { activation }, LayerCache::Activation { outputs }) => outputs
            .iter()
            .zip(dseq)
            .map(|(y, dy)| {
                if skip_act {
                    dy
                } else {
                    backprop(*activation, y, &dy)
                }
            })
            .collect(),
        (LayerSpec::Dropout { .. }, LayerCache::Dropout { masks }) => match masks {
            None => dseq,
            Some(m) => dseq.iter().zip(m).map(|(d, m)| d.hadamard(m)).collect(),
        },
        (
            LayerSpec::SimpleRnn {
                return_sequences, ..
            },
            LayerCache::SimpleRnn { inputs, hs },
        ) => {
            let steps = inputs.len();
            let above = spread(dseq, steps, *return_sequences);
            let mut dx = vec![Matrix::zeros(0, 0); steps];
            let mut dh_next = Matrix::zeros(hs[0].rows(), hs[0].cols());
            for t in (0..steps).rev() {
                let mut dh = above[t].clone();
                dh.add_assign(&dh_next);
                let da = backprop(Activation::Tanh, &hs[t + 1], &dh);
                g[0].add_assign(&inputs[t].t_matmul(&da));
                g[1].add_assign(&hs[t].t_matmul(&da));
                add_bias_grad(&mut g[2], &da);
                dx[t] = da.matmul_t(&p[0]);
                dh_next = da.matmul_t(&p[1]);
            }
            dx
        }
        (
            LayerSpec::Lstm {
                units,
                return_sequences,
            },
            LayerCache::Lstm {
                inputs,
                hs,
                cs,
                gates,
                tanh_c,
            },
        ) => {
            let (u, steps) = (*units, inputs.len());
            let n = hs[0].rows();
            let above = spread(dseq, steps, *return_sequences);
            let mut dx = vec![Matrix::zeros(0, 0); steps];
            let mut dh_next = Matrix::zeros(n, u);
            let mut dc_next = Matrix::zeros(n, u);
            for t in (0..steps).rev() {
                let z = &gates[t];
                let mut dz = Matrix::zeros(n, 4 * u);
                let mut dc_prev = Matrix::zeros(n, u);
                for r in 0..n {
                    for k in 0..u {
                        let (i, f, gg, o) = (
                            z.get(r, k),
                            z.get(r, u + k),
                            z.get(r, 2 * u + k),
                            z.get(r, 3 * u + k),
                        );
                        let dh = above[t].get(r, k) + dh_next.get(r, k);
                        let tc = tanh_c[t].get(r, k);
                        let dc = dh * o * (1.0 - tc * tc) + dc_next.get(r, k);
                        let d_o = dh * tc;
                        let d_i = dc * gg;
                        let d_g = dc * i;
                        let d_f = dc * cs[t].get(r, k);
                        dc_prev.set(r, k, dc * f);
                        dz.set(r, k, d_i * i * (1.0 - i));
                        dz.set(r, u + k, d_f * f * (1.0 - f));
                        dz.set(r, 2 * u + k, d_g * (1.0 - gg * gg));
                        dz.set(r, 3 * u + k, d_o * o * (1.0 - o));
                    }
                }
                g[0].add_assign(&inputs[t].t_matmul(&dz));
                g[1].add_assign(&hs[t].t_matmul(&dz));
                add_bias_grad(&mut g[2], &dz);
                dx[t] = dz.matmul_t(&p[0]);
                dh_next = dz.matmul_t(&p[1]);
                dc_next = dc_prev;
            }
            dx
        }
        (
            LayerSpec::Gru {
                units,
                return_sequences,
            },
            LayerCache::Gru { inputs, hs, gates },
        ) => {
            let (u, steps) = (*units, inputs.len());
            let n = hs[0].rows();
            let u_zr = p[1].col_block(0, 2 * u);
            let u_h = p[1].col_block(2 * u, u);
            let above = spread(dseq, steps, *return_sequences);
            let mut dx = vec![Matrix::zeros(0, 0); steps];
            let mut dh_next = Matrix::zeros(n, u);
            for t in (0..steps).rev() {
                let (z, h_prev) = (&gates[t], &hs[t]);
                // pre-activation gradients for update and candidate
                let mut da = Matrix::zeros(n, 3 * u);
                let mut dh_prev = Matrix::zeros(n, u);
                let mut rh = Matrix::zeros(n, u);
                for r in 0..n {
                    for k in 0..u {
                        let (upd, rst, hh) = (z.get(r, k), z.get(r, u + k), z.get(r, 2 * u + k));
                        let hp = h_prev.get(r, k);
                        let dh = above[t].get(r, k) + dh_next.get(r, k);
                        da.set(r, k, dh * (hp - hh) * upd * (1.0 - upd));
                        da.set(r, 2 * u + k, dh * (1.0 - upd) * (1.0 - hh * hh));
                        dh_prev.set(r, k, dh * upd);
                        rh.set(r, k, rst * hp);
                    }
                }
                let da_h = da.col_block(2 * u, u);
                let d_rh = da_h.matmul_t(&u_h);
                for r in 0..n {
                    for k in 0..u {
                        let rst = z.get(r, u + k);
                        let hp = h_prev.get(r, k);
                        da.set(r, u + k, d_rh.get(r, k) * hp * rst * (1.0 - rst));
                        dh_prev.set(r, k, dh_prev.get(r, k) + d_rh.get(r, k) * rst);
                    }
                }
                let da_zr = da.col_block(0, 2 * u);
                let mut du = Matrix::zeros(u, 3 * u);
                du.set_col_block(0, &h_prev.t_matmul(&da_zr));
                du.set_col_block(2 * u, &rh.t_matmul(&da_h));
                g[0].add_assign(&inputs[t].t_matmul(&da));
                g[1].add_assign(&du);
                add_bias_grad(&mut g[2], &da);
                dh_prev.add_assign(&da_zr.matmul_t(&u_zr));
                dx[t] = da.matmul_t(&p[0]);
                dh_next = dh_prev;
            }
            dx
        }
        _ => unreachable!("cache built from the same spec"),
    }
}

/// Per-timestep gradient w.r.t. a recurrent layer's hidden outputs.
fn spread(dseq: Vec<Matrix>, steps: usize, return_sequences: bool) -> Vec<Matrix> {
    if return_sequences {
        return dseq;
    }
    let last = dseq.into_iter().last().expect("one step");
    let mut out: Vec<Matrix> = (0..steps - 1)
        .map(|_| Matrix::zeros(last.rows(), last.cols()))
        .collect();
    out.push(last);
    out
}

fn add_bias_grad(gb: &mut Matrix, dz: &Matrix) {
    for (b, s) in gb.as_mut_slice().iter_mut().zip(dz.column_sums()) {
        *b += s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn spec() -> NeuralSpec {
        NeuralSpec::new(
            3,
            vec![
                LayerSpec::dense(5, Activation::Relu),
                LayerSpec::Dropout { rate: 0.0 },
                LayerSpec::Lstm {
                    units: 4,
                    return_sequences: true,
                },
                LayerSpec::Gru {
                    units: 3,
                    return_sequences: false,
                },
                LayerSpec::dense(4, Activation::Softmax),
            ],
        )
        .unwrap()
    }

    fn batch() -> Matrix {
        Matrix::from_rows(&[vec![0.1, -0.5, 1.2], vec![2.0, 0.3, -0.7]])
    }

    #[test]
    fn zero_rate_dropout_ignores_rng() {
        let s = spec();
        let p = ParameterBlock::init(&s, 1);
        let (a, _) = forward(&s, &p, &[batch()], true, &mut rng::stream(1)).unwrap();
        let (b, _) = forward(&s, &p, &[batch()], true, &mut rng::stream(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let s = spec();
        let p = ParameterBlock::init(&s, 2);
        let out = predict(&s, &p, &[batch()]).unwrap();
        for r in 0..out.rows() {
            assert!((out.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn inference_is_deterministic() {
        let s = spec();
        let p = ParameterBlock::init(&s, 3);
        let (a, _) = forward(&s, &p, &[batch()], false, &mut rng::stream(1)).unwrap();
        let (b, _) = forward(&s, &p, &[batch()], false, &mut rng::stream(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, predict(&s, &p, &[batch()]).unwrap());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let s = spec();
        let p = ParameterBlock::init(&s, 4);
        let (_, cache) = forward(&s, &p, &[batch()], true, &mut rng::stream(1)).unwrap();
        let g = backward(&s, &p, &cache, OutputGrad::Probs(Matrix::zeros(2, 4))).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wrong_width_is_shape_mismatch() {
        let s = spec();
        let p = ParameterBlock::init(&s, 4);
        let r = forward(&s, &p, &[Matrix::zeros(2, 2)], false, &mut rng::stream(1));
        assert!(matches!(r, Err(NnError::ShapeMismatch(_))));
    }

    #[test]
    fn modified_params_make_cache_stale() {
        let s = spec();
        let mut p = ParameterBlock::init(&s, 4);
        let (_, cache) = forward(&s, &p, &[batch()], true, &mut rng::stream(1)).unwrap();
        p.set_flat(0, 0.5);
        let r = backward(&s, &p, &cache, OutputGrad::Probs(Matrix::zeros(2, 4)));
        assert!(matches!(r, Err(NnError::StaleCache)));
    }

    #[test]
    fn return_sequences_is_shape_preserving_at_one_step() {
        let s = NeuralSpec::new(
            2,
            vec![LayerSpec::SimpleRnn {
                units: 3,
                return_sequences: true,
            }],
        )
        .unwrap();
        let p = ParameterBlock::init(&s, 5);
        let out = predict(&s, &p, &[Matrix::zeros(4, 2)]).unwrap();
        assert_eq!(out.shape(), (4, 3));
    }
}

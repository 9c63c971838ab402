use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NeuralSpec;
use crate::matrix::Matrix;
use crate::rng;

/// Trainable tensors, grouped per layer. Also used for gradients and Adam
/// moments, which share the layout.
///
/// Dense layers hold `[W, b]`; recurrent layers hold `[W, U, b]` with the
/// gate blocks stacked along columns. Biases are `1×n` matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterBlock {
    pub layers: Vec<Vec<Matrix>>,
    /// Bumped on every in-place update; forward caches remember it.
    #[serde(skip)]
    pub(crate) version: u64,
}

impl ParameterBlock {
    /// Glorot-uniform weights, zero biases.
    pub fn init(spec: &NeuralSpec, seed: u64) -> Self {
        let mut rng = rng::stream(seed);
        let layers = spec
            .param_shapes()
            .into_iter()
            .map(|shapes| {
                let n = shapes.len();
                shapes
                    .into_iter()
                    .enumerate()
                    .map(|(i, (r, c))| {
                        if i + 1 == n {
                            return Matrix::zeros(r, c);
                        }
                        let limit = (6.0 / (r + c) as f64).sqrt();
                        let data = (0..r * c)
                            .map(|_| rng.random_range(-limit..limit))
                            .collect();
                        Matrix::from_vec(r, c, data)
                    })
                    .collect()
            })
            .collect();
        Self { layers, version: 0 }
    }

    pub fn zeros_like(other: &ParameterBlock) -> Self {
        Self {
            layers: other
                .layers
                .iter()
                .map(|l| {
                    l.iter()
                        .map(|m| Matrix::zeros(m.rows(), m.cols()))
                        .collect()
                })
                .collect(),
            version: 0,
        }
    }

    pub fn zeros_for(spec: &NeuralSpec) -> Self {
        Self {
            layers: spec
                .param_shapes()
                .into_iter()
                .map(|s| s.into_iter().map(|(r, c)| Matrix::zeros(r, c)).collect())
                .collect(),
            version: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.tensors().map(|m| m.as_slice().len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tensors(&self) -> impl Iterator<Item = &Matrix> {
        self.layers.iter().flatten()
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Matrix> {
        self.layers.iter_mut().flatten()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().all(Matrix::is_finite)
    }

    pub fn same_shape(&self, other: &ParameterBlock) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.shape() == y.shape())
            })
    }

    /// Flat view of every scalar, in layer/tensor/row-major order.
    pub fn flatten(&self) -> Vec<f64> {
        self.tensors()
            .flat_map(|m| m.as_slice().iter().copied())
            .collect()
    }

    pub(crate) fn bump(&mut self) {
        self.version = self.version.wrapping_add(1);
    }

    /// Sets scalar `k` of the flattened view.
    pub fn set_flat(&mut self, mut k: usize, value: f64) {
        let slot = self
            .tensors_mut()
            .find_map(|m| {
                let n = m.as_slice().len();
                if k < n {
                    Some(&mut m.as_mut_slice()[k])
                } else {
                    k -= n;
                    None
                }
            })
            .expect("flat index out of range");
        *slot = value;
        self.bump();
    }

    pub fn clip(&mut self, limit: f64) {
        for m in self.tensors_mut() {
            for v in m.as_mut_slice() {
                *v = v.clamp(-limit, limit);
            }
        }
    }
}

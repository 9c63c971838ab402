use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{Builder, FeaturePolicy, Gini, Newton, Tree};
use crate::matrix::Matrix;
use crate::nn::{sigmoid, softmax};
use crate::rng;

/// Single CART classifier. `max_depth = None` grows until every leaf is
/// pure or unsplittable.
pub fn grow_tree(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    max_depth: Option<usize>,
    min_samples_split: usize,
) -> Tree {
    let crit = Gini {
        labels: y,
        n_classes,
        min_samples_split,
    };
    Builder::new(x, &crit, max_depth, FeaturePolicy::All).build((0..x.rows()).collect())
}

pub fn tree_proba(tree: &Tree, x: &Matrix) -> Matrix {
    let k = tree.leaf_value(x.row(0)).len();
    let mut out = Matrix::zeros(x.rows(), k);
    for r in 0..x.rows() {
        out.row_mut(r).copy_from_slice(tree.leaf_value(x.row(r)));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub n_classes: usize,
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Bootstrap-sampled trees with `ceil(sqrt(d))` candidate features per
    /// split. Tree `t` draws from its own substream of `seed`.
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, n_trees: usize, seed: u64) -> Forest {
        let n = x.rows();
        let mtry = (x.cols() as f64).sqrt().ceil() as usize;
        let crit = Gini {
            labels: y,
            n_classes,
            min_samples_split: 2,
        };
        let trees = (0..n_trees)
            .map(|t| {
                let mut r = rng::substream(seed, t as u64);
                let rows: Vec<usize> = (0..n).map(|_| r.random_range(0..n)).collect();
                Builder::new(x, &crit, None, FeaturePolicy::Random { rng: &mut r, mtry })
                    .build(rows)
            })
            .collect();
        Forest { n_classes, trees }
    }

    pub fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), self.n_classes);
        if self.trees.is_empty() {
            return Matrix::filled(x.rows(), self.n_classes, 1.0 / self.n_classes as f64);
        }
        for tree in &self.trees {
            for r in 0..x.rows() {
                for (o, v) in out.row_mut(r).iter_mut().zip(tree.leaf_value(x.row(r))) {
                    *o += v;
                }
            }
        }
        out.scale(1.0 / self.trees.len() as f64);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            n_rounds: 100,
            learning_rate: 0.1,
            max_depth: 3,
            lambda: 1.0,
        }
    }
}

/// Additive Newton boosting on the logistic (binary, one score) or softmax
/// (multiclass, one score per class) objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boosted {
    pub n_classes: usize,
    pub config: BoostConfig,
    /// `rounds[m][k]` is the tree for score `k` in round `m`.
    pub rounds: Vec<Vec<Tree>>,
    /// Training log-loss before the first round and after each round.
    pub train_loss: Vec<f64>,
}

impl Boosted {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, config: &BoostConfig) -> Boosted {
        let n = x.rows();
        let n_scores = if n_classes == 2 { 1 } else { n_classes };
        let mut scores = Matrix::zeros(n, n_scores);
        let mut rounds = Vec::with_capacity(config.n_rounds);
        let mut train_loss = vec![log_loss(&scores_to_proba(&scores, n_classes), y)];
        for _ in 0..config.n_rounds {
            let proba = scores_to_proba(&scores, n_classes);
            let mut round = Vec::with_capacity(n_scores);
            for k in 0..n_scores {
                let cls = if n_scores == 1 { 1 } else { k };
                let (grad, hess): (Vec<f64>, Vec<f64>) = (0..n)
                    .map(|i| {
                        let p = proba.get(i, cls);
                        (p - f64::from(u8::from(y[i] == cls)), p * (1.0 - p))
                    })
                    .unzip();
                let crit = Newton {
                    grad: &grad,
                    hess: &hess,
                    lambda: config.lambda,
                    learning_rate: config.learning_rate,
                };
                round.push(
                    Builder::new(x, &crit, Some(config.max_depth), FeaturePolicy::All)
                        .build((0..n).collect()),
                );
            }
            for (k, tree) in round.iter().enumerate() {
                for i in 0..n {
                    let v = scores.get(i, k) + tree.leaf_value(x.row(i))[0];
                    scores.set(i, k, v);
                }
            }
            rounds.push(round);
            train_loss.push(log_loss(&scores_to_proba(&scores, n_classes), y));
        }
        Boosted {
            n_classes,
            config: config.clone(),
            rounds,
            train_loss,
        }
    }

    pub fn scores(&self, x: &Matrix) -> Matrix {
        let n_scores = if self.n_classes == 2 {
            1
        } else {
            self.n_classes
        };
        let mut scores = Matrix::zeros(x.rows(), n_scores);
        for round in &self.rounds {
            for (k, tree) in round.iter().enumerate() {
                for r in 0..x.rows() {
                    let v = scores.get(r, k) + tree.leaf_value(x.row(r))[0];
                    scores.set(r, k, v);
                }
            }
        }
        scores
    }

    pub fn predict_proba(&self, x: &Matrix) -> Matrix {
        scores_to_proba(&self.scores(x), self.n_classes)
    }
}

fn scores_to_proba(scores: &Matrix, n_classes: usize) -> Matrix {
    let mut out = Matrix::zeros(scores.rows(), n_classes);
    for r in 0..scores.rows() {
        if n_classes == 2 {
            let p = sigmoid(scores.get(r, 0));
            out.row_mut(r).copy_from_slice(&[1.0 - p, p]);
        } else {
            out.row_mut(r).copy_from_slice(&softmax(scores.row(r)));
        }
    }
    out
}

/// Mean negative log-likelihood of the true classes, clipped at 1e-15.
pub fn log_loss(proba: &Matrix, y: &[usize]) -> f64 {
    let n = y.len().max(1) as f64;
    y.iter()
        .enumerate()
        .map(|(i, &c)| -proba.get(i, c).max(1e-15).ln())
        .sum::<f64>()
        / n
}

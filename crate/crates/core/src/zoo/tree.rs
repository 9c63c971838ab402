//! CART trees shared by the decision tree, the random forest and the
//! boosted ensemble.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::rng::Stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: Vec<f64>,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat node arena; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_value(&self, row: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }
}

/// Sufficient statistics and split scoring for one kind of tree.
pub(crate) trait Criterion {
    type Acc: Clone;
    fn empty(&self) -> Self::Acc;
    fn add(&self, acc: &mut Self::Acc, row: usize);
    fn remove(&self, acc: &mut Self::Acc, row: usize);
    /// Higher is better.
    fn score(&self, left: &Self::Acc, right: &Self::Acc) -> f64;
    /// Whether a node with these statistics must become a leaf regardless of splits.
    fn is_terminal(&self, acc: &Self::Acc, n: usize) -> bool;
    /// Whether the best available split is worth taking.
    fn accept(&self, parent: &Self::Acc, best_score: f64) -> bool;
    fn leaf(&self, acc: &Self::Acc) -> Vec<f64>;
}

/// Gini impurity for class labels. Maximizing `Σ c_l²/n_l + Σ c_r²/n_r` is
/// the same as minimizing the weighted child impurity.
pub(crate) struct Gini<'a> {
    pub labels: &'a [usize],
    pub n_classes: usize,
    pub min_samples_split: usize,
}

impl Criterion for Gini<'_> {
    type Acc = (Vec<f64>, usize);

    fn empty(&self) -> Self::Acc {
        (vec![0.0; self.n_classes], 0)
    }

    fn add(&self, acc: &mut Self::Acc, row: usize) {
        acc.0[self.labels[row]] += 1.0;
        acc.1 += 1;
    }

    fn remove(&self, acc: &mut Self::Acc, row: usize) {
        acc.0[self.labels[row]] -= 1.0;
        acc.1 -= 1;
    }

    fn score(&self, l: &Self::Acc, r: &Self::Acc) -> f64 {
        let side = |a: &Self::Acc| a.0.iter().map(|c| c * c).sum::<f64>() / a.1 as f64;
        side(l) + side(r)
    }

    fn is_terminal(&self, acc: &Self::Acc, n: usize) -> bool {
        n < self.min_samples_split.max(2) || acc.0.iter().filter(|&&c| c > 0.0).count() <= 1
    }

    fn accept(&self, _: &Self::Acc, _: f64) -> bool {
        // An impure node always splits when it can, even at zero gain.
        true
    }

    fn leaf(&self, acc: &Self::Acc) -> Vec<f64> {
        let n = acc.1.max(1) as f64;
        acc.0.iter().map(|c| c / n).collect()
    }
}

/// Second-order boosting objective with L2 leaf regularization.
pub(crate) struct Newton<'a> {
    pub grad: &'a [f64],
    pub hess: &'a [f64],
    pub lambda: f64,
    pub learning_rate: f64,
}

impl Newton<'_> {
    fn term(&self, g: f64, h: f64) -> f64 {
        let d = h + self.lambda;
        if d > 0.0 {
            g * g / d
        } else {
            0.0
        }
    }
}

impl Criterion for Newton<'_> {
    type Acc = (f64, f64);

    fn empty(&self) -> Self::Acc {
        (0.0, 0.0)
    }

    fn add(&self, acc: &mut Self::Acc, row: usize) {
        acc.0 += self.grad[row];
        acc.1 += self.hess[row];
    }

    fn remove(&self, acc: &mut Self::Acc, row: usize) {
        acc.0 -= self.grad[row];
        acc.1 -= self.hess[row];
    }

    fn score(&self, l: &Self::Acc, r: &Self::Acc) -> f64 {
        self.term(l.0, l.1) + self.term(r.0, r.1)
    }

    fn is_terminal(&self, _: &Self::Acc, n: usize) -> bool {
        n < 2
    }

    fn accept(&self, parent: &Self::Acc, best: f64) -> bool {
        let base = self.term(parent.0, parent.1);
        best - base > 1e-12 * base.abs().max(1.0)
    }

    fn leaf(&self, acc: &Self::Acc) -> Vec<f64> {
        let d = acc.1 + self.lambda;
        vec![if d > 0.0 {
            -acc.0 / d * self.learning_rate
        } else {
            0.0
        }]
    }
}

/// How candidate features are chosen at each node.
pub(crate) enum FeaturePolicy<'a> {
    All,
    /// A fresh random subset of `mtry` features per node; more are drawn
    /// one at a time if none of the subset admits a split.
    Random {
        rng: &'a mut Stream,
        mtry: usize,
    },
}

struct Best {
    feature: usize,
    threshold: f64,
    score: f64,
}

pub(crate) struct Builder<'a, C: Criterion> {
    x: &'a Matrix,
    crit: &'a C,
    max_depth: Option<usize>,
    policy: FeaturePolicy<'a>,
    nodes: Vec<Node>,
}

impl<'a, C: Criterion> Builder<'a, C> {
    pub fn new(
        x: &'a Matrix,
        crit: &'a C,
        max_depth: Option<usize>,
        policy: FeaturePolicy<'a>,
    ) -> Self {
        Self {
            x,
            crit,
            max_depth,
            policy,
            nodes: Vec::new(),
        }
    }

    pub fn build(mut self, rows: Vec<usize>) -> Tree {
        self.grow(rows, 0);
        Tree { nodes: self.nodes }
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        let mut acc = self.crit.empty();
        for &r in &rows {
            self.crit.add(&mut acc, r);
        }
        self.nodes.push(Node::Leaf {
            value: self.crit.leaf(&acc),
        });
        if self.max_depth.is_some_and(|m| depth >= m) || self.crit.is_terminal(&acc, rows.len()) {
            return at;
        }
        let Some(best) = self.choose(&rows, &acc) else {
            return at;
        };
        if !self.crit.accept(&acc, best.score) {
            return at;
        }
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.x.get(i, best.feature) <= best.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        at
    }

    fn choose(&mut self, rows: &[usize], total: &C::Acc) -> Option<Best> {
        let d = self.x.cols();
        match &mut self.policy {
            FeaturePolicy::All => search(self.x, self.crit, rows, total, 0..d),
            FeaturePolicy::Random { rng, mtry } => {
                let mut order: Vec<usize> = (0..d).collect();
                order.shuffle(*rng);
                let k = (*mtry).clamp(1, d);
                let mut first = order[..k].to_vec();
                first.sort_unstable();
                if let Some(b) = search(self.x, self.crit, rows, total, first.into_iter()) {
                    return Some(b);
                }
                order[k..]
                    .iter()
                    .find_map(|&f| search(self.x, self.crit, rows, total, std::iter::once(f)))
            }
        }
    }
}

/// Exhaustive midpoint search over `features` (visited in the given order).
/// Only strict improvements replace the incumbent, so ties keep the
/// earliest feature and the lowest threshold.
fn search<C: Criterion>(
    x: &Matrix,
    crit: &C,
    rows: &[usize],
    total: &C::Acc,
    features: impl Iterator<Item = usize>,
) -> Option<Best> {
    let mut best: Option<Best> = None;
    let mut sorted = rows.to_vec();
    for f in features {
        sorted.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
        let mut left = crit.empty();
        let mut right = total.clone();
        for k in 0..sorted.len() - 1 {
            crit.add(&mut left, sorted[k]);
            crit.remove(&mut right, sorted[k]);
            let (a, b) = (x.get(sorted[k], f), x.get(sorted[k + 1], f));
            if a >= b {
                continue;
            }
            let mut threshold = a + (b - a) / 2.0;
            if threshold >= b {
                threshold = a;
            }
            let score = crit.score(&left, &right);
            let improves = match &best {
                None => true,
                Some(cur) => score > cur.score + 1e-12 * cur.score.abs().max(1.0),
            };
            if improves {
                best = Some(Best {
                    feature: f,
                    threshold,
                    score,
                });
            }
        }
    }
    best
}

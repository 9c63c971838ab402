use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;

use super::game::Game;
use super::{check_inputs, ExplainError, ProbabilityModel, ShapExplanation};
use crate::matrix::Matrix;
use crate::rng;

pub const DEFAULT_SHAP_SAMPLES: usize = 4096;

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coalitions with popcount `k` out of `m` bits, in increasing mask order.
fn masks_of_size(m: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << m;
    let mut cur = if k == 0 { 0 } else { (1u64 << k) - 1 };
    let mut done = false;
    std::iter::from_fn(move || {
        if done || cur >= limit {
            return None;
        }
        let out = cur;
        if k == 0 {
            done = true;
        } else {
            // Gosper's hack: next larger integer with the same popcount.
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            cur = (((r ^ cur) >> 2) / c) | r;
        }
        Some(out)
    })
}

#[derive(Default)]
struct Design {
    masks: Vec<u64>,
    weights: Vec<f64>,
    seen: HashMap<u64, usize>,
}

impl Design {
    fn push(&mut self, mask: u64, w: f64) {
        self.seen.insert(mask, self.masks.len());
        self.masks.push(mask);
        self.weights.push(w);
    }

    /// Adds a sampled coalition, or bumps its weight if already present.
    /// Returns true when a new coalition was added.
    fn sample(&mut self, mask: u64) -> bool {
        match self.seen.get(&mask) {
            Some(&i) => {
                self.weights[i] += 1.0;
                false
            }
            None => {
                self.push(mask, 1.0);
                true
            }
        }
    }
}

/// Kernel SHAP with the efficiency constraint enforced exactly.
///
/// Coalition sizes are enumerated completely, smallest (and paired largest)
/// first, while the budget covers them; the remaining budget is sampled from
/// the Shapley kernel. With `n_samples >= 2^d - 2` every coalition is
/// enumerated and the result equals the exact Shapley values.
pub fn kernel_shap<M: ProbabilityModel + ?Sized>(
    model: &M,
    x: &[f64],
    background: &Matrix,
    names: &[String],
    n_samples: usize,
    seed: u64,
    target_class: usize,
) -> Result<ShapExplanation, ExplainError> {
    check_inputs(x, background, names)?;
    let m = x.len();
    let min = 2 * m + 2;
    if n_samples < min {
        return Err(ExplainError::TooFewSamples { n: n_samples, min });
    }
    if m > 62 {
        return Err(ExplainError::TooManyFeatures { d: m, max: 62 });
    }
    let game = Game {
        model,
        x,
        background,
        target: target_class,
    };
    let full = (1u64 << m) - 1;
    let ends = game.values(&[0, full]);
    let (base, fx) = (ends[0], ends[1]);
    if m == 1 {
        return Ok(ShapExplanation::new(
            names,
            x,
            target_class,
            base,
            fx,
            vec![fx - base],
        ));
    }
    let budget = n_samples.min(((1u128 << m) - 2).min(usize::MAX as u128) as usize);

    // Sizes s and m - s share a kernel weight and are handled as a pair.
    let n_sizes = m / 2;
    let n_paired = (m - 1) / 2;
    // Kernel mass per coalition size, both halves of a pair folded together.
    let mut weight: Vec<f64> = (1..=n_sizes)
        .map(|s| (m - 1) as f64 / (s * (m - s)) as f64)
        .collect();
    for w in weight.iter_mut().take(n_paired) {
        *w *= 2.0;
    }
    let total: f64 = weight.iter().sum();
    weight.iter_mut().for_each(|w| *w /= total);

    let mut design = Design::default();
    let mut left = budget as f64;
    let mut remaining = weight.clone();
    let mut n_full = 0;
    for s in 1..=n_sizes {
        let paired = s <= n_paired;
        let count = binom(m, s) * if paired { 2.0 } else { 1.0 };
        if left * remaining[s - 1] / count < 1.0 - 1e-8 {
            break;
        }
        n_full += 1;
        left -= count;
        if remaining[s - 1] < 1.0 {
            let scale = 1.0 - remaining[s - 1];
            remaining.iter_mut().for_each(|w| *w /= scale);
        }
        let w = weight[s - 1] / binom(m, s) / if paired { 2.0 } else { 1.0 };
        for mask in masks_of_size(m, s) {
            design.push(mask, w);
            if paired {
                design.push(full ^ mask, w);
            }
        }
    }

    let n_fixed = design.masks.len();
    let mut samples_left = budget.saturating_sub(n_fixed);
    if n_full < n_sizes && samples_left > 0 {
        let mut probs: Vec<f64> = weight[n_full..].to_vec();
        for (k, p) in probs.iter_mut().enumerate() {
            if k + n_full < n_paired {
                *p /= 2.0;
            }
        }
        let picker = WeightedIndex::new(&probs).expect("positive kernel weights");
        let mut r = rng::stream(seed);
        let mut draws = 4 * samples_left;
        while samples_left > 0 && draws > 0 {
            draws -= 1;
            let s = picker.sample(&mut r) + n_full + 1;
            let mask = sample(&mut r, m, s)
                .iter()
                .fold(0u64, |acc, i| acc | 1 << i);
            if design.sample(mask) {
                samples_left -= 1;
            }
            if samples_left > 0 && s <= n_paired && design.sample(full ^ mask) {
                samples_left -= 1;
            }
        }
        let weight_left: f64 = weight[n_full..].iter().sum();
        let sampled: f64 = design.weights[n_fixed..].iter().sum();
        if sampled > 0.0 {
            design.weights[n_fixed..]
                .iter_mut()
                .for_each(|w| *w *= weight_left / sampled);
        }
    }

    let v = game.values(&design.masks);
    let phi = solve(&design, &v, m, base, fx);
    Ok(ShapExplanation::new(names, x, target_class, base, fx, phi))
}

/// Weighted least squares with Σ phi = fx - base, solved by eliminating the
/// last feature.
fn solve(design: &Design, v: &[f64], m: usize, base: f64, fx: f64) -> Vec<f64> {
    let n = design.masks.len();
    let delta = fx - base;
    let bit = |mask: u64, i: usize| (mask >> i & 1) as f64;
    let mut xt_w_x = DMatrix::<f64>::zeros(m - 1, m - 1);
    let mut xt_w_y = DVector::<f64>::zeros(m - 1);
    for k in 0..n {
        let mask = design.masks[k];
        let w = design.weights[k];
        let last = bit(mask, m - 1);
        let y = v[k] - base - last * delta;
        let row: Vec<f64> = (0..m - 1).map(|i| bit(mask, i) - last).collect();
        for i in 0..m - 1 {
            if row[i] == 0.0 {
                continue;
            }
            xt_w_y[i] += w * row[i] * y;
            for j in 0..m - 1 {
                xt_w_x[(i, j)] += w * row[i] * row[j];
            }
        }
    }
    let head = xt_w_x
        .clone()
        .cholesky()
        .map(|c| c.solve(&xt_w_y))
        .unwrap_or_else(|| {
            xt_w_x
                .svd(true, true)
                .solve(&xt_w_y, 1e-12)
                .expect("svd solve")
        });
    let mut phi: Vec<f64> = head.iter().copied().collect();
    phi.push(delta - phi.iter().sum::<f64>());
    phi
}

use serde::{Deserialize, Serialize};

use super::game::Game;
use super::{check_inputs, ExplainError, ProbabilityModel, ShapExplanation};
use crate::matrix::Matrix;

pub const MAX_EXACT_FEATURES: usize = 15;
pub const MAX_INTERACTION_FEATURES: usize = 12;

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for i in 1..=n {
        f[i] = f[i - 1] * i as f64;
    }
    f
}

fn phi_from_values(v: &[f64], d: usize) -> Vec<f64> {
    let f = factorials(d);
    // Shapley weight by coalition size.
    let w: Vec<f64> = (0..d).map(|s| f[s] * f[d - s - 1] / f[d]).collect();
    let mut phi = vec![0.0; d];
    for mask in 0..v.len() as u64 {
        let s = mask.count_ones() as usize;
        for (i, p) in phi.iter_mut().enumerate() {
            if mask >> i & 1 == 0 {
                *p += w[s] * (v[(mask | 1 << i) as usize] - v[mask as usize]);
            }
        }
    }
    phi
}

/// Shapley values by enumerating every coalition; `d` is limited to 15.
pub fn exact_shapley<M: ProbabilityModel + ?Sized>(
    model: &M,
    x: &[f64],
    background: &Matrix,
    names: &[String],
    target_class: usize,
) -> Result<ShapExplanation, ExplainError> {
    check_inputs(x, background, names)?;
    let d = x.len();
    if d > MAX_EXACT_FEATURES {
        return Err(ExplainError::TooManyFeatures {
            d,
            max: MAX_EXACT_FEATURES,
        });
    }
    let v = Game {
        model,
        x,
        background,
        target: target_class,
    }
    .all_values();
    let phi = phi_from_values(&v, d);
    Ok(ShapExplanation::new(
        names,
        x,
        target_class,
        v[0],
        v[v.len() - 1],
        phi,
    ))
}

fn interaction_from_values(v: &[f64], d: usize, i: usize, j: usize) -> f64 {
    let f = factorials(d);
    let (bi, bj) = (1u64 << i, 1u64 << j);
    let mut total = 0.0;
    for mask in 0..v.len() as u64 {
        if mask & (bi | bj) != 0 {
            continue;
        }
        let s = mask.count_ones() as usize;
        let w = f[s] * f[d - s - 2] / (2.0 * f[d - 1]);
        let at = |m: u64| v[m as usize];
        total += w * (at(mask | bi | bj) - at(mask | bi) - at(mask | bj) + at(mask));
    }
    total
}

/// Shapley interaction index between features `i` and `j`; `d` is limited to 12.
pub fn shap_interaction<M: ProbabilityModel + ?Sized>(
    model: &M,
    x: &[f64],
    background: &Matrix,
    i: usize,
    j: usize,
    target_class: usize,
) -> Result<f64, ExplainError> {
    let d = x.len();
    if i == j {
        return Err(ExplainError::SameFeature(i));
    }
    if d > MAX_INTERACTION_FEATURES {
        return Err(ExplainError::TooManyFeatures {
            d,
            max: MAX_INTERACTION_FEATURES,
        });
    }
    if i >= d || j >= d || background.cols() != d || background.rows() == 0 {
        return Err(ExplainError::ShapeMismatch(format!(
            "features ({i}, {j}) of {d}"
        )));
    }
    let v = Game {
        model,
        x,
        background,
        target: target_class,
    }
    .all_values();
    Ok(interaction_from_values(&v, d, i, j))
}

/// All pairwise interactions of one instance. Off-diagonal cells hold the
/// interaction index; the diagonal holds main effects
/// `phi_i - Σ_{j≠i} phi_ij`, so each row sums to `phi_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Σ_{j≠i} phi_ij per feature.
    pub interaction_totals: Vec<f64>,
    pub base_value: f64,
    pub prediction: f64,
}

pub fn interaction_matrix<M: ProbabilityModel + ?Sized>(
    model: &M,
    x: &[f64],
    background: &Matrix,
    names: &[String],
    target_class: usize,
) -> Result<InteractionMatrix, ExplainError> {
    check_inputs(x, background, names)?;
    let d = x.len();
    if d > MAX_INTERACTION_FEATURES {
        return Err(ExplainError::TooManyFeatures {
            d,
            max: MAX_INTERACTION_FEATURES,
        });
    }
    let v = Game {
        model,
        x,
        background,
        target: target_class,
    }
    .all_values();
    let phi = phi_from_values(&v, d);
    let mut values = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let p = interaction_from_values(&v, d, i, j);
            values[i][j] = p;
            values[j][i] = p;
        }
    }
    let interaction_totals: Vec<f64> = (0..d)
        .map(|i| (0..d).filter(|&j| j != i).map(|j| values[i][j]).sum())
        .collect();
    for i in 0..d {
        values[i][i] = phi[i] - interaction_totals[i];
    }
    Ok(InteractionMatrix {
        names: names.to_vec(),
        values,
        interaction_totals,
        base_value: v[0],
        prediction: v[v.len() - 1],
    })
}

//! Model-agnostic attributions: exact and kernel-sampled Shapley values,
//! Shapley interaction indices, and permutation feature importance.

mod game;
mod kernel;
mod pfi;
mod shapley;

use serde::{Deserialize, Serialize};

pub use kernel::{kernel_shap, DEFAULT_SHAP_SAMPLES};
pub use pfi::{pfi, pfi_feature, PfiFeature, PfiMetric, PfiReport};
pub use shapley::{
    exact_shapley, interaction_matrix, shap_interaction, InteractionMatrix, MAX_EXACT_FEATURES,
    MAX_INTERACTION_FEATURES,
};

use crate::eval::EvalError;
use crate::matrix::Matrix;
use crate::zoo::FittedModel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExplainError {
    #[error("{d} features exceed the enumeration limit of {max}")]
    TooManyFeatures { d: usize, max: usize },
    #[error("{n} samples is below the minimum of {min}")]
    TooFewSamples { n: usize, min: usize },
    #[error("interaction needs two distinct features, got {0} twice")]
    SameFeature(usize),
    #[error("unknown metric: {0}")]
    UnknownMetric(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Anything that maps rows to class probabilities.
pub trait ProbabilityModel {
    fn predict_proba(&self, x: &Matrix) -> Matrix;
}

impl<F: Fn(&Matrix) -> Matrix> ProbabilityModel for F {
    fn predict_proba(&self, x: &Matrix) -> Matrix {
        self(x)
    }
}

impl ProbabilityModel for FittedModel {
    /// Panics on a feature-count mismatch; explainers check widths first.
    fn predict_proba(&self, x: &Matrix) -> Matrix {
        FittedModel::predict_proba(self, x).expect("input width matches the model")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub name: String,
    pub value: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapExplanation {
    /// Expected target-class probability over the background rows.
    pub base_value: f64,
    pub target_class: usize,
    /// Model output on the explained row.
    pub prediction: f64,
    /// `prediction - base_value - Σ phi`.
    pub residual: f64,
    pub features: Vec<Attribution>,
}

impl ShapExplanation {
    fn new(
        names: &[String],
        x: &[f64],
        target_class: usize,
        base_value: f64,
        prediction: f64,
        phi: Vec<f64>,
    ) -> Self {
        let residual = prediction - base_value - phi.iter().sum::<f64>();
        let features = names
            .iter()
            .zip(x)
            .zip(phi)
            .map(|((n, &value), phi)| Attribution {
                name: n.clone(),
                value,
                phi,
            })
            .collect();
        Self {
            base_value,
            target_class,
            prediction,
            residual,
            features,
        }
    }

    pub fn phi(&self) -> Vec<f64> {
        self.features.iter().map(|a| a.phi).collect()
    }

    /// The `k` features with the largest |phi|, ties in feature order.
    pub fn top_k(&self, k: usize) -> Vec<&Attribution> {
        let mut order: Vec<&Attribution> = self.features.iter().collect();
        order.sort_by(|a, b| b.phi.abs().total_cmp(&a.phi.abs()));
        order.truncate(k);
        order
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub name: String,
    pub mean_abs_phi: f64,
}

/// Mean |phi| per feature over `explanations`, sorted descending with ties
/// in feature order.
pub fn mean_abs_shap(
    explanations: &[ShapExplanation],
) -> Result<Vec<GlobalImportance>, ExplainError> {
    let first = explanations
        .first()
        .ok_or_else(|| ExplainError::EmptyInput("no explanations".into()))?;
    let names: Vec<&str> = first.features.iter().map(|a| a.name.as_str()).collect();
    let mut sums = vec![0.0; names.len()];
    for e in explanations {
        if e.features.len() != names.len()
            || e.features.iter().zip(&names).any(|(a, n)| a.name != *n)
        {
            return Err(ExplainError::ShapeMismatch(
                "explanations cover different features".into(),
            ));
        }
        for (s, a) in sums.iter_mut().zip(&e.features) {
            *s += a.phi.abs();
        }
    }
    let n = explanations.len() as f64;
    let mut out: Vec<GlobalImportance> = names
        .iter()
        .zip(sums)
        .map(|(name, s)| GlobalImportance {
            name: name.to_string(),
            mean_abs_phi: s / n,
        })
        .collect();
    out.sort_by(|a, b| b.mean_abs_phi.total_cmp(&a.mean_abs_phi));
    Ok(out)
}

fn check_inputs(x: &[f64], background: &Matrix, names: &[String]) -> Result<(), ExplainError> {
    if background.rows() == 0 {
        return Err(ExplainError::EmptyInput(
            "background set has no rows".into(),
        ));
    }
    if x.len() != background.cols() || names.len() != x.len() {
        return Err(ExplainError::ShapeMismatch(format!(
            "instance has {} values, background {} columns, {} names",
            x.len(),
            background.cols(),
            names.len()
        )));
    }
    Ok(())
}

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{ExplainError, ProbabilityModel};
use crate::eval::{confusion, evaluate, metrics};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PfiMetric {
    Accuracy,
    /// Weighted F1.
    F1,
    Auc,
}

impl PfiMetric {
    pub fn score(self, proba: &Matrix, y: &[usize]) -> Result<f64, ExplainError> {
        Ok(match self {
            PfiMetric::Accuracy => {
                metrics(&confusion(y, &proba.argmax_rows(), proba.cols())?)?.accuracy
            }
            PfiMetric::F1 => metrics(&confusion(y, &proba.argmax_rows(), proba.cols())?)?.f1,
            PfiMetric::Auc => evaluate(y, proba)?
                .roc_auc
                .ok_or(crate::eval::EvalError::SingleClass)?,
        })
    }
}

impl fmt::Display for PfiMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PfiMetric::Accuracy => "accuracy",
            PfiMetric::F1 => "f1",
            PfiMetric::Auc => "auc",
        })
    }
}

impl FromStr for PfiMetric {
    type Err = ExplainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "accuracy" => Ok(PfiMetric::Accuracy),
            "f1" => Ok(PfiMetric::F1),
            "auc" | "roc_auc" => Ok(PfiMetric::Auc),
            other => Err(ExplainError::UnknownMetric(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfiFeature {
    pub name: String,
    pub mean: f64,
    /// Population standard deviation over repeats.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfiReport {
    pub metric: PfiMetric,
    pub repeats: usize,
    pub baseline_score: f64,
    /// In input feature order.
    pub features: Vec<PfiFeature>,
}

impl PfiReport {
    /// Features by mean importance, descending; ties keep feature order.
    pub fn ranked(&self) -> Vec<&PfiFeature> {
        let mut out: Vec<&PfiFeature> = self.features.iter().collect();
        out.sort_by(|a, b| b.mean.total_cmp(&a.mean));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("feature,mean_importance,std\n");
        for f in self.ranked() {
            s.push_str(&format!("{},{},{}\n", f.name, f.mean, f.std));
        }
        s
    }
}

/// Permutation importance: `baseline - score` after shuffling one column,
/// averaged over `repeats`. Each (feature, repeat) cell shuffles with its
/// own stream derived from `seed`, so results do not depend on the order
/// cells are processed. `x` is never modified.
pub fn pfi<M: ProbabilityModel + ?Sized>(
    model: &M,
    x: &Matrix,
    y: &[usize],
    names: &[String],
    metric: &str,
    repeats: usize,
    seed: u64,
) -> Result<PfiReport, ExplainError> {
    let metric: PfiMetric = metric.parse()?;
    if repeats == 0 {
        return Err(ExplainError::TooFewSamples { n: 0, min: 1 });
    }
    if x.rows() != y.len() || names.len() != x.cols() {
        return Err(ExplainError::ShapeMismatch(format!(
            "{}x{} matrix, {} labels, {} names",
            x.rows(),
            x.cols(),
            y.len(),
            names.len()
        )));
    }
    if x.rows() == 0 {
        return Err(ExplainError::EmptyInput("no rows to permute".into()));
    }
    let baseline = metric.score(&model.predict_proba(x), y)?;
    let features = (0..x.cols())
        .map(|f| pfi_feature(model, x, y, names, metric, baseline, f, repeats, seed))
        .collect::<Result<_, _>>()?;
    Ok(PfiReport {
        metric,
        repeats,
        baseline_score: baseline,
        features,
    })
}

/// Importance of feature `f` alone; [`pfi`] calls this for every column.
#[allow(clippy::too_many_arguments)]
pub fn pfi_feature<M: ProbabilityModel + ?Sized>(
    model: &M,
    x: &Matrix,
    y: &[usize],
    names: &[String],
    metric: PfiMetric,
    baseline: f64,
    f: usize,
    repeats: usize,
    seed: u64,
) -> Result<PfiFeature, ExplainError> {
    let column = x.column(f);
    let mut samples = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let mut shuffled = column.clone();
        shuffled.shuffle(&mut rng::substream(
            rng::derive_seed(seed, f as u64),
            r as u64,
        ));
        let mut permuted = x.clone();
        for (row, v) in shuffled.into_iter().enumerate() {
            permuted.set(row, f, v);
        }
        samples.push(baseline - metric.score(&model.predict_proba(&permuted), y)?);
    }
    let mean = samples.iter().sum::<f64>() / repeats as f64;
    let std = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / repeats as f64).sqrt();
    Ok(PfiFeature {
        name: names[f].clone(),
        mean,
        std,
    })
}

//! Pearson-correlation redundancy pruning.

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectError {
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
}

/// Pearson correlation coefficient. Returns 0 when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, SelectError> {
    if x.len() != y.len() {
        return Err(SelectError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(SelectError::TooFewSamples(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// Row-major `names.len()²` coefficients.
    pub r: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r[i][j]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Restriction to the named features, in the given order.
    pub fn subset(&self, keep: &[String]) -> CorrelationMatrix {
        let idx: Vec<usize> = keep
            .iter()
            .map(|k| {
                self.names
                    .iter()
                    .position(|n| n == k)
                    .expect("subset of own names")
            })
            .collect();
        CorrelationMatrix {
            names: keep.to_vec(),
            r: idx
                .iter()
                .map(|&i| idx.iter().map(|&j| self.r[i][j]).collect())
                .collect(),
        }
    }
}

/// Pairwise correlations; the upper triangle is computed and mirrored.
/// Constant features get 0 everywhere, including the diagonal.
pub fn correlation_matrix(features: &FeatureMatrix) -> Result<CorrelationMatrix, SelectError> {
    if features.n_rows() < 2 {
        return Err(SelectError::TooFewSamples(features.n_rows()));
    }
    let d = features.n_features();
    let cols: Vec<Vec<f64>> = (0..d).map(|c| features.data().column(c)).collect();
    let mut r = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let v = if i == j {
                if pearson(&cols[i], &cols[i])? == 0.0 {
                    0.0
                } else {
                    1.0
                }
            } else {
                pearson(&cols[i], &cols[j])?
            };
            r[i][j] = v;
            r[j][i] = v;
        }
    }
    Ok(CorrelationMatrix {
        names: features.names().to_vec(),
        r,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedFeature {
    pub name: String,
    pub partner: String,
    pub abs_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub threshold: f64,
    pub kept: Vec<String>,
    pub dropped: Vec<DroppedFeature>,
}

pub const DEFAULT_THRESHOLD: f64 = 0.95;

/// Greedy scan in feature order: a feature is dropped when its absolute
/// correlation with an already-kept earlier feature exceeds `threshold`
/// (strictly). The first such kept feature is recorded as the partner.
pub fn prune_redundant(
    corr: &CorrelationMatrix,
    threshold: f64,
) -> Result<PruneReport, SelectError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(SelectError::InvalidThreshold(threshold));
    }
    let mut kept: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..corr.len() {
        match kept.iter().find(|&&i| corr.get(i, j).abs() > threshold) {
            Some(&i) => dropped.push(DroppedFeature {
                name: corr.names[j].clone(),
                partner: corr.names[i].clone(),
                abs_r: corr.get(i, j).abs(),
            }),
            None => kept.push(j),
        }
    }
    Ok(PruneReport {
        threshold,
        kept: kept.into_iter().map(|i| corr.names[i].clone()).collect(),
        dropped,
    })
}

//! Confusion matrices, weighted precision/recall/F1, accuracy and ROC-AUC.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("label {label} out of range for {k} classes")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("only one class present; AUC is undefined")]
    SingleClass,
    #[error("no samples to evaluate")]
    EmptyInput,
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub k: usize,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|c| self.counts[c][c]).sum()
    }
}

pub fn confusion(
    y_true: &[usize],
    y_pred: &[usize],
    k: usize,
) -> Result<ConfusionMatrix, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if let Some(label) = [t, p].into_iter().find(|&l| l >= k) {
            return Err(EvalError::LabelOutOfRange { label, k });
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { k, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Support-weighted averages of the per-class values.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub roc_auc: Option<f64>,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Accuracy plus per-class and weighted precision/recall/F1; 0/0 counts as 0.
pub fn metrics(cm: &ConfusionMatrix) -> Result<EvalReport, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyInput);
    }
    let per_class: Vec<ClassMetrics> = (0..cm.k)
        .map(|c| {
            let tp = cm.counts[c][c] as f64;
            let row: u64 = cm.counts[c].iter().sum();
            let col: u64 = cm.counts.iter().map(|r| r[c]).sum();
            let precision = ratio(tp, col as f64);
            let recall = ratio(tp, row as f64);
            ClassMetrics {
                precision,
                recall,
                f1: ratio(2.0 * precision * recall, precision + recall),
                support: row,
            }
        })
        .collect();
    let n = total as f64;
    let weighted = |f: fn(&ClassMetrics) -> f64| {
        per_class
            .iter()
            .map(|m| m.support as f64 * f(m))
            .sum::<f64>()
            / n
    };
    Ok(EvalReport {
        accuracy: cm.trace() as f64 / n,
        precision: weighted(|m| m.precision),
        recall: weighted(|m| m.recall),
        f1: weighted(|m| m.f1),
        roc_auc: None,
        per_class,
        confusion: cm.clone(),
    })
}

/// Mann-Whitney AUC for `positive` flags: the share of positive/negative
/// pairs ranked correctly, ties counting one half.
pub fn roc_auc_binary(positive: &[bool], scores: &[f64]) -> Result<f64, EvalError> {
    if positive.len() != scores.len() {
        return Err(EvalError::LengthMismatch(positive.len(), scores.len()));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of midranks of the positives (ranks start at 1).
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&o| positive[o]).count() as f64;
        i = j + 1;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// Macro average of one-vs-rest AUCs over the classes present in `y_true`.
pub fn roc_auc_multiclass(y_true: &[usize], proba: &Matrix) -> Result<f64, EvalError> {
    if y_true.len() != proba.rows() {
        return Err(EvalError::LengthMismatch(y_true.len(), proba.rows()));
    }
    if let Some(&label) = y_true.iter().find(|&&y| y >= proba.cols()) {
        return Err(EvalError::LabelOutOfRange {
            label,
            k: proba.cols(),
        });
    }
    let present: Vec<usize> = (0..proba.cols()).filter(|c| y_true.contains(c)).collect();
    if present.len() < 2 {
        return Err(EvalError::SingleClass);
    }
    let mut sum = 0.0;
    for &c in &present {
        let flags: Vec<bool> = y_true.iter().map(|&y| y == c).collect();
        sum += roc_auc_binary(&flags, &proba.column(c))?;
    }
    Ok(sum / present.len() as f64)
}

/// Full report from probabilities: argmax predictions, metrics, and AUC
/// (positive-class column for two classes, macro one-vs-rest otherwise).
/// AUC is left empty when the labels hold a single class.
pub fn evaluate(y_true: &[usize], proba: &Matrix) -> Result<EvalReport, EvalError> {
    let k = proba.cols();
    let cm = confusion(y_true, &proba.argmax_rows(), k)?;
    let mut report = metrics(&cm)?;
    let auc = if k == 2 {
        let flags: Vec<bool> = y_true.iter().map(|&y| y == 1).collect();
        roc_auc_binary(&flags, &proba.column(1))
    } else {
        roc_auc_multiclass(y_true, proba)
    };
    report.roc_auc = match auc {
        Ok(a) => Some(a),
        Err(EvalError::SingleClass) => None,
        Err(e) => return Err(e),
    };
    Ok(report)
}

pub const COMPARISON_HEADER: &str = "model,accuracy,precision,recall,f1,roc_auc";

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// One comparison-table row; AUC is empty when undefined.
    pub fn csv_row(&self, model: &str) -> String {
        let auc = self.roc_auc.map(|a| format!("{a:.6}")).unwrap_or_default();
        format!(
            "{model},{:.6},{:.6},{:.6},{:.6},{auc}",
            self.accuracy, self.precision, self.recall, self.f1
        )
    }
}

use super::ProbabilityModel;
use crate::matrix::Matrix;

/// Rows per model call when evaluating many coalitions at once.
const CHUNK_ROWS: usize = 8192;

/// Coalition values `v(S)`: the mean target-class probability over the
/// background rows with the features in `S` replaced by the instance's values.
pub(crate) struct Game<'a, M: ProbabilityModel + ?Sized> {
    pub model: &'a M,
    pub x: &'a [f64],
    pub background: &'a Matrix,
    pub target: usize,
}

impl<M: ProbabilityModel + ?Sized> Game<'_, M> {
    pub fn d(&self) -> usize {
        self.x.len()
    }

    /// Values for coalitions given as bitmasks (bit `i` = feature `i` present).
    pub fn values(&self, masks: &[u64]) -> Vec<f64> {
        let nb = self.background.rows();
        let d = self.d();
        let per_chunk = (CHUNK_ROWS / nb).max(1);
        let mut out = Vec::with_capacity(masks.len());
        for chunk in masks.chunks(per_chunk) {
            let mut rows = Matrix::zeros(chunk.len() * nb, d);
            for (m, &mask) in chunk.iter().enumerate() {
                for b in 0..nb {
                    let row = rows.row_mut(m * nb + b);
                    row.copy_from_slice(self.background.row(b));
                    for (i, v) in row.iter_mut().enumerate() {
                        if mask >> i & 1 == 1 {
                            *v = self.x[i];
                        }
                    }
                }
            }
            let p = self.model.predict_proba(&rows);
            for m in 0..chunk.len() {
                out.push((0..nb).map(|b| p.get(m * nb + b, self.target)).sum::<f64>() / nb as f64);
            }
        }
        out
    }

    /// Values of all `2^d` coalitions, indexed by mask.
    pub fn all_values(&self) -> Vec<f64> {
        let masks: Vec<u64> = (0..1u64 << self.d()).collect();
        self.values(&masks)
    }
}

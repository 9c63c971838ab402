use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DataError, FeatureMatrix, LabelVector};

/// Row indices of a train/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded uniform permutation of `0..n`; the first `floor(n * train_frac)`
/// indices form the training part.
pub fn split_indices(n: usize, train_frac: f64, seed: u64) -> Result<SplitIndices, DataError> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(DataError::DegenerateSplit { n, train: 0 });
    }
    let n_train = (n as f64 * train_frac).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(DataError::DegenerateSplit { n, train: n_train });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut crate::rng::stream(seed));
    let test = idx.split_off(n_train);
    Ok(SplitIndices { train: idx, test })
}

pub struct SplitData {
    pub indices: SplitIndices,
    pub train: (FeatureMatrix, LabelVector),
    pub test: (FeatureMatrix, LabelVector),
}

pub fn split(
    features: &FeatureMatrix,
    labels: &LabelVector,
    train_frac: f64,
    seed: u64,
) -> Result<SplitData, DataError> {
    if features.n_rows() != labels.len() {
        return Err(DataError::ShapeMismatch(format!(
            "{} feature rows but {} labels",
            features.n_rows(),
            labels.len()
        )));
    }
    let indices = split_indices(labels.len(), train_frac, seed)?;
    Ok(SplitData {
        train: (
            features.take_rows(&indices.train),
            labels.take(&indices.train),
        ),
        test: (
            features.take_rows(&indices.test),
            labels.take(&indices.test),
        ),
        indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_rule_sizes() {
        let s = split_indices(473, 0.75, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (354, 119));
        let s = split_indices(473, 0.80, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (378, 95));
    }

    #[test]
    fn same_seed_same_split() {
        assert_eq!(
            split_indices(100, 0.7, 9).unwrap(),
            split_indices(100, 0.7, 9).unwrap()
        );
        assert_ne!(
            split_indices(100, 0.7, 9).unwrap(),
            split_indices(100, 0.7, 10).unwrap()
        );
    }

    #[test]
    fn degenerate_split() {
        assert!(matches!(
            split_indices(1, 0.5, 0),
            Err(DataError::DegenerateSplit { .. })
        ));
        assert!(matches!(
            split_indices(3, 0.2, 0),
            Err(DataError::DegenerateSplit { .. })
        ));
    }
}

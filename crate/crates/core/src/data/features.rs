use serde::{Deserialize, Serialize};

use super::DataError;
use crate::matrix::Matrix;

/// Fully numeric model input: rows are samples, columns are named features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    names: Vec<String>,
    data: Matrix,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, data: Matrix) -> Result<Self, DataError> {
        if names.len() != data.cols() {
            return Err(DataError::ShapeMismatch(format!(
                "{} feature names for {} columns",
                names.len(),
                data.cols()
            )));
        }
        if names.iter().any(|n| n == super::DX_COLUMN) {
            return Err(DataError::SchemaMismatch(
                "the label column cannot be a feature".into(),
            ));
        }
        if !data.is_finite() {
            return Err(DataError::NonFinite);
        }
        Ok(Self { names, data })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    pub fn n_rows(&self) -> usize {
        self.data.rows()
    }

    pub fn n_features(&self) -> usize {
        self.data.cols()
    }

    pub fn take_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            names: self.names.clone(),
            data: self.data.select_rows(idx),
        }
    }

    /// Keeps the named features, in the order given.
    pub fn select(&self, keep: &[String]) -> Result<FeatureMatrix, DataError> {
        let idx = keep
            .iter()
            .map(|k| {
                self.names
                    .iter()
                    .position(|n| n == k)
                    .ok_or_else(|| DataError::UnknownColumn(k.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FeatureMatrix {
            names: keep.to_vec(),
            data: self.data.select_cols(&idx),
        })
    }
}

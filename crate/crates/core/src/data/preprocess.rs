use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ColumnKind, ColumnValues, DataError, DataTable, FeatureMatrix};
use crate::matrix::Matrix;

/// Sentinel category that replaces missing categorical cells.
pub const MISSING_CATEGORY: &str = "MISSING";

/// Everything learned while preprocessing, so the identical transform can be
/// replayed on new data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessState {
    pub impute_means: BTreeMap<String, f64>,
    pub category_maps: BTreeMap<String, BTreeMap<String, i64>>,
    pub scaler_means: BTreeMap<String, f64>,
    /// Population standard deviation; 0 marks a constant feature.
    pub scaler_stds: BTreeMap<String, f64>,
}

impl PreprocessState {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state is always serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, DataError> {
        serde_json::from_str(s).map_err(|e| DataError::Parse(e.to_string()))
    }
}

/// Fills missing numeric cells with the column mean and missing categorical
/// cells with [`MISSING_CATEGORY`]. Means are recorded for every numeric column.
pub fn impute_mean(table: &DataTable) -> Result<(DataTable, PreprocessState), DataError> {
    let mut state = PreprocessState::default();
    for (spec, col) in table.schema().columns().iter().zip(table.columns()) {
        if let ColumnValues::Numeric(v) = &col.values {
            let observed: Vec<f64> = v
                .iter()
                .zip(&col.missing)
                .filter(|(_, &m)| !m)
                .map(|(&x, _)| x)
                .collect();
            if observed.is_empty() {
                return Err(DataError::AllMissingColumn(spec.name.clone()));
            }
            state.impute_means.insert(
                spec.name.clone(),
                observed.iter().sum::<f64>() / observed.len() as f64,
            );
        }
    }
    let out = apply_impute(table, &state)?;
    Ok((out, state))
}

/// Imputes with means stored in `state`.
pub fn apply_impute(table: &DataTable, state: &PreprocessState) -> Result<DataTable, DataError> {
    let mut out = table.clone();
    let names: Vec<String> = table.schema().names().map(str::to_string).collect();
    for (name, col) in names.iter().zip(out.columns_mut()) {
        if !col.missing.iter().any(|&m| m) {
            continue;
        }
        match &mut col.values {
            ColumnValues::Numeric(v) => {
                let mean = *state
                    .impute_means
                    .get(name)
                    .ok_or_else(|| DataError::AllMissingColumn(name.clone()))?;
                for (x, m) in v.iter_mut().zip(&col.missing) {
                    if *m {
                        *x = mean;
                    }
                }
            }
            ColumnValues::Text(v) => {
                for (x, m) in v.iter_mut().zip(&col.missing) {
                    if *m {
                        *x = MISSING_CATEGORY.to_string();
                    }
                }
            }
        }
        col.missing.iter_mut().for_each(|m| *m = false);
    }
    Ok(out)
}

/// Replaces every text column with integer codes. Columns that already have
/// a map in `state` reuse it; others get a fresh map assigned in
/// lexicographic order of the category text.
pub fn encode_categoricals(
    table: &DataTable,
    state: &mut PreprocessState,
) -> Result<DataTable, DataError> {
    let mut out = table.clone();
    let specs = table.schema().columns().to_vec();
    for (spec, col) in specs.iter().zip(out.columns_mut()) {
        let ColumnValues::Text(values) = &col.values else {
            continue;
        };
        debug_assert_eq!(spec.kind, ColumnKind::Categorical);
        if col.missing.iter().any(|&m| m) {
            return Err(DataError::UnimputedMissing(spec.name.clone()));
        }
        let map = state
            .category_maps
            .entry(spec.name.clone())
            .or_insert_with(|| {
                let distinct: BTreeSet<&String> = values.iter().collect();
                distinct
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| (s.clone(), i as i64))
                    .collect()
            });
        let codes = values
            .iter()
            .map(|v| {
                map.get(v)
                    .map(|&c| c as f64)
                    .ok_or_else(|| DataError::UnknownCategory {
                        column: spec.name.clone(),
                        value: v.clone(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        col.values = ColumnValues::Numeric(codes);
    }
    Ok(out)
}

/// Fits per-feature mean and population std on `train`, stores them in
/// `state`, and returns `train` followed by every `apply_to` matrix, all
/// standardized. Zero-variance features map to 0.
pub fn standardize(
    train: &FeatureMatrix,
    apply_to: &[&FeatureMatrix],
    state: &mut PreprocessState,
) -> Result<Vec<FeatureMatrix>, DataError> {
    if train.n_rows() == 0 {
        return Err(DataError::EmptyInput);
    }
    let n = train.n_rows() as f64;
    let m = train.data();
    for (c, name) in train.names().iter().enumerate() {
        let mean = (0..m.rows()).map(|r| m.get(r, c)).sum::<f64>() / n;
        let var = (0..m.rows())
            .map(|r| (m.get(r, c) - mean).powi(2))
            .sum::<f64>()
            / n;
        state.scaler_means.insert(name.clone(), mean);
        state.scaler_stds.insert(name.clone(), var.sqrt());
    }
    std::iter::once(train)
        .chain(apply_to.iter().copied())
        .map(|fm| apply_standardize(fm, state))
        .collect()
}

/// Standardizes with the stored scaler.
pub fn apply_standardize(
    fm: &FeatureMatrix,
    state: &PreprocessState,
) -> Result<FeatureMatrix, DataError> {
    let params = fm
        .names()
        .iter()
        .map(
            |n| match (state.scaler_means.get(n), state.scaler_stds.get(n)) {
                (Some(&mu), Some(&sd)) => Ok((mu, sd)),
                _ => Err(DataError::UnknownColumn(n.clone())),
            },
        )
        .collect::<Result<Vec<_>, _>>()?;
    let src = fm.data();
    let mut out = Matrix::zeros(src.rows(), src.cols());
    for r in 0..src.rows() {
        for (c, &(mu, sd)) in params.iter().enumerate() {
            let z = if sd > 0.0 {
                (src.get(r, c) - mu) / sd
            } else {
                0.0
            };
            out.set(r, c, z);
        }
    }
    FeatureMatrix::new(fm.names().to_vec(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Column, ColumnSchema, Schema};

    fn num_table(v: Vec<f64>, missing: Vec<bool>) -> DataTable {
        let schema = Schema::new(vec![ColumnSchema::numeric("x")]).unwrap();
        DataTable::new(
            schema,
            vec![Column {
                values: ColumnValues::Numeric(v),
                missing,
            }],
        )
        .unwrap()
    }

    fn text_table(v: &[&str], missing: Vec<bool>) -> DataTable {
        let schema = Schema::new(vec![ColumnSchema::categorical("c")]).unwrap();
        let values = ColumnValues::Text(v.iter().map(|s| s.to_string()).collect());
        DataTable::new(schema, vec![Column { values, missing }]).unwrap()
    }

    fn fm(cols: &[&[f64]]) -> FeatureMatrix {
        let rows = cols[0].len();
        let mut m = Matrix::zeros(rows, cols.len());
        for (c, col) in cols.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        FeatureMatrix::new((0..cols.len()).map(|i| format!("f{i}")).collect(), m).unwrap()
    }

    #[test]
    fn numeric_mean_imputation() {
        let (out, state) = impute_mean(&num_table(
            vec![1.0, f64::NAN, 3.0],
            vec![false, true, false],
        ))
        .unwrap();
        assert_eq!(
            out.column("x").unwrap().values,
            ColumnValues::Numeric(vec![1.0, 2.0, 3.0])
        );
        assert_eq!(out.missing_count(), 0);
        assert_eq!(state.impute_means["x"], 2.0);
    }

    #[test]
    fn nothing_missing_is_unchanged() {
        let t = num_table(vec![1.0, 5.0], vec![false, false]);
        assert_eq!(impute_mean(&t).unwrap().0, t);
    }

    #[test]
    fn categorical_missing_gets_sentinel() {
        let (out, _) = impute_mean(&text_table(&["A", ""], vec![false, true])).unwrap();
        assert_eq!(out.column("c").unwrap().text_at(1), Some(MISSING_CATEGORY));
    }

    #[test]
    fn all_missing_numeric_column_errors() {
        let r = impute_mean(&num_table(vec![f64::NAN], vec![true]));
        assert!(matches!(r, Err(DataError::AllMissingColumn(_))));
    }

    #[test]
    fn lexicographic_codes() {
        let mut state = PreprocessState::default();
        let out =
            encode_categoricals(&text_table(&["b", "a", "b"], vec![false; 3]), &mut state).unwrap();
        assert_eq!(
            out.column("c").unwrap().values,
            ColumnValues::Numeric(vec![1.0, 0.0, 1.0])
        );
        assert_eq!(
            state.category_maps["c"],
            BTreeMap::from([("a".to_string(), 0), ("b".to_string(), 1)])
        );
    }

    #[test]
    fn all_numeric_encode_is_identity() {
        let t = num_table(vec![1.0, 2.0], vec![false, false]);
        assert_eq!(
            encode_categoricals(&t, &mut PreprocessState::default()).unwrap(),
            t
        );
    }

    #[test]
    fn stored_map_rejects_unseen_category() {
        let mut state = PreprocessState::default();
        state
            .category_maps
            .insert("c".into(), BTreeMap::from([("a".to_string(), 0)]));
        let r = encode_categoricals(&text_table(&["c"], vec![false]), &mut state);
        assert!(matches!(r, Err(DataError::UnknownCategory { value, .. }) if value == "c"));
    }

    #[test]
    fn constant_column_scales_to_zero() {
        let out = standardize(
            &fm(&[&[5.0, 5.0, 5.0]]),
            &[],
            &mut PreprocessState::default(),
        )
        .unwrap();
        assert_eq!(out[0].data().as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_point_column() {
        let mut state = PreprocessState::default();
        let out = standardize(&fm(&[&[0.0, 2.0]]), &[], &mut state).unwrap();
        assert_eq!(state.scaler_means["f0"], 1.0);
        assert_eq!(state.scaler_stds["f0"], 1.0);
        assert_eq!(out[0].data().as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn scaler_fitted_on_train_only() {
        let train = fm(&[&[0.0, 2.0]]);
        let test = fm(&[&[4.0]]);
        let out = standardize(&train, &[&test], &mut PreprocessState::default()).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].data().as_slice(), &[3.0]);
    }

    #[test]
    fn state_json_keys() {
        let json = PreprocessState::default().to_json();
        for key in [
            "impute_means",
            "category_maps",
            "scaler_means",
            "scaler_stds",
        ] {
            assert!(json.contains(key), "{key} missing from {json}");
        }
    }
}

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{DataError, FeatureMatrix, Schema};
use crate::matrix::Matrix;

/// Cell storage for one column. Missing cells hold a placeholder (`NaN` or
/// the empty string) that is never read; check [`Column::missing`] first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnValues {
    Numeric(Vec<f64>),
    Text(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub values: ColumnValues,
    pub missing: Vec<bool>,
}

impl Column {
    pub fn numeric(values: Vec<f64>) -> Self {
        let missing = vec![false; values.len()];
        Self {
            values: ColumnValues::Numeric(values),
            missing,
        }
    }

    pub fn text(values: Vec<String>) -> Self {
        let missing = vec![false; values.len()];
        Self {
            values: ColumnValues::Text(values),
            missing,
        }
    }

    pub fn len(&self) -> usize {
        self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    /// Observed numeric value at `row`, `None` when missing or textual.
    pub fn numeric_at(&self, row: usize) -> Option<f64> {
        match &self.values {
            ColumnValues::Numeric(v) if !self.missing[row] => Some(v[row]),
            _ => None,
        }
    }

    pub fn text_at(&self, row: usize) -> Option<&str> {
        match &self.values {
            ColumnValues::Text(v) if !self.missing[row] => Some(&v[row]),
            _ => None,
        }
    }

    fn extend(&mut self, other: &Column) -> Result<(), ()> {
        match (&mut self.values, &other.values) {
            (ColumnValues::Numeric(a), ColumnValues::Numeric(b)) => a.extend_from_slice(b),
            (ColumnValues::Text(a), ColumnValues::Text(b)) => a.extend(b.iter().cloned()),
            _ => return Err(()),
        }
        self.missing.extend_from_slice(&other.missing);
        Ok(())
    }

    fn take(&self, idx: &[usize]) -> Column {
        let values = match &self.values {
            ColumnValues::Numeric(v) => ColumnValues::Numeric(idx.iter().map(|&i| v[i]).collect()),
            ColumnValues::Text(v) => {
                ColumnValues::Text(idx.iter().map(|&i| v[i].clone()).collect())
            }
        };
        Column {
            values,
            missing: idx.iter().map(|&i| self.missing[i]).collect(),
        }
    }
}

/// Column-typed table with a per-cell missing mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    schema: Schema,
    columns: Vec<Column>,
    n_rows: usize,
}

impl DataTable {
    pub fn new(schema: Schema, columns: Vec<Column>) -> Result<Self, DataError> {
        if schema.len() != columns.len() {
            return Err(DataError::SchemaMismatch(format!(
                "{} schema columns but {} data columns",
                schema.len(),
                columns.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Column::len);
        if let Some((i, _)) = columns.iter().enumerate().find(|(_, c)| c.len() != n_rows) {
            return Err(DataError::SchemaMismatch(format!(
                "column '{}' has {} rows, expected {n_rows}",
                schema.columns()[i].name,
                columns[i].len()
            )));
        }
        Ok(Self {
            schema,
            columns,
            n_rows,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub(crate) fn columns_mut(&mut self) -> &mut [Column] {
        &mut self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.schema.index_of(name).map(|i| &self.columns[i])
    }

    pub fn missing_count(&self) -> usize {
        self.columns.iter().map(Column::missing_count).sum()
    }

    /// Rows `idx`, in that order.
    pub fn take_rows(&self, idx: &[usize]) -> DataTable {
        DataTable {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(idx)).collect(),
            n_rows: idx.len(),
        }
    }

    /// Builds the model input from every numeric-stored column except the
    /// label column and `exclude`. Categorical columns must be encoded first.
    pub fn to_feature_matrix(&self, exclude: &[String]) -> Result<FeatureMatrix, DataError> {
        for name in exclude {
            if self.schema.index_of(name).is_none() {
                return Err(DataError::UnknownColumn(name.clone()));
            }
        }
        let mut names = Vec::new();
        let mut cols = Vec::new();
        for (spec, col) in self.schema.columns().iter().zip(&self.columns) {
            if spec.name == super::DX_COLUMN || exclude.contains(&spec.name) {
                continue;
            }
            let ColumnValues::Numeric(v) = &col.values else {
                return Err(DataError::NotEncoded(spec.name.clone()));
            };
            if col.missing.iter().any(|&m| m) {
                return Err(DataError::UnimputedMissing(spec.name.clone()));
            }
            names.push(spec.name.clone());
            cols.push(v);
        }
        let mut m = Matrix::zeros(self.n_rows, cols.len());
        for (c, v) in cols.iter().enumerate() {
            for (r, &x) in v.iter().enumerate() {
                m.set(r, c, x);
            }
        }
        FeatureMatrix::new(names, m)
    }

    /// CSV with a header row; missing cells are written empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.schema.names())?;
        for r in 0..self.n_rows {
            let record: Vec<String> = self
                .columns
                .iter()
                .map(|c| {
                    if c.missing[r] {
                        return String::new();
                    }
                    match &c.values {
                        ColumnValues::Numeric(v) => format!("{}", v[r]),
                        ColumnValues::Text(v) => v[r].clone(),
                    }
                })
                .collect();
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Row-concatenates tables that share one schema, in argument order.
pub fn merge_tables(parts: &[DataTable]) -> Result<DataTable, DataError> {
    let first = parts.first().ok_or(DataError::EmptyInput)?;
    let mut merged = first.clone();
    for (k, part) in parts.iter().enumerate().skip(1) {
        if part.schema != first.schema {
            return Err(DataError::SchemaMismatch(format!(
                "part {k} has a different schema from part 0"
            )));
        }
        for (i, (dst, src)) in merged.columns.iter_mut().zip(&part.columns).enumerate() {
            dst.extend(src).map_err(|_| {
                DataError::SchemaMismatch(format!(
                    "column '{}' of part {k} has different storage",
                    first.schema.columns()[i].name
                ))
            })?;
        }
        merged.n_rows += part.n_rows;
    }
    Ok(merged)
}

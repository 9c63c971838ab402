use std::path::Path;

use super::{Column, ColumnKind, DataError, DataTable, Schema};

/// Cell-level parsing options for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    /// Trimmed cell texts that mean "missing".
    pub missing_tokens: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            missing_tokens: ["", "N/A", "NaN", "-999"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

/// Reads a headed CSV file and matches its columns to `schema` by name.
pub fn load_csv(path: &Path, schema: &Schema, opts: &CsvOptions) -> Result<DataTable, DataError> {
    if !path.is_file() {
        return Err(DataError::FileNotFound(path.to_path_buf()));
    }
    let file = std::fs::File::open(path)?;
    read_csv(file, schema, opts)
}

pub fn read_csv<R: std::io::Read>(
    input: R,
    schema: &Schema,
    opts: &CsvOptions,
) -> Result<DataTable, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let unknown: Vec<String> = header
        .iter()
        .filter(|h| schema.index_of(h).is_none())
        .cloned()
        .collect();
    let absent: Vec<String> = schema
        .names()
        .filter(|n| !header.iter().any(|h| h == n))
        .map(str::to_string)
        .collect();
    if !unknown.is_empty() || !absent.is_empty() {
        return Err(DataError::HeaderMismatch { absent, unknown });
    }
    // position of each schema column in the file
    let file_pos: Vec<usize> = schema
        .names()
        .map(|n| header.iter().position(|h| h == n).expect("checked above"))
        .collect();

    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); schema.len()];
    for record in reader.records() {
        let record = record?;
        for (col, &pos) in file_pos.iter().enumerate() {
            let raw = record.get(pos).unwrap_or("").trim();
            let missing = opts.missing_tokens.iter().any(|t| t == raw);
            cells[col].push(if missing { None } else { Some(raw.to_string()) });
        }
    }
    let n_rows = cells.first().map_or(0, Vec::len);
    if n_rows == 0 {
        return Err(DataError::EmptyTable);
    }

    let columns = schema
        .columns()
        .iter()
        .zip(cells)
        .map(|(spec, raw)| match spec.kind {
            ColumnKind::Numeric => {
                let parsed: Vec<Option<f64>> = raw
                    .iter()
                    .map(|c| {
                        c.as_deref()
                            .and_then(|s| s.parse::<f64>().ok())
                            .filter(|v| v.is_finite())
                    })
                    .collect();
                Column {
                    missing: parsed.iter().map(Option::is_none).collect(),
                    values: super::ColumnValues::Numeric(
                        parsed.iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
                    ),
                }
            }
            ColumnKind::Categorical => Column {
                missing: raw.iter().map(Option::is_none).collect(),
                values: super::ColumnValues::Text(
                    raw.into_iter().map(Option::unwrap_or_default).collect(),
                ),
            },
        })
        .collect();
    DataTable::new(schema.clone(), columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnSchema;

    fn schema() -> Schema {
        Schema::new(vec![
            ColumnSchema::numeric("Age"),
            ColumnSchema::categorical("Site"),
        ])
        .unwrap()
    }

    #[test]
    fn header_only_is_empty_table() {
        let r = read_csv("Age,Site\n".as_bytes(), &schema(), &CsvOptions::default());
        assert!(matches!(r, Err(DataError::EmptyTable)));
    }

    #[test]
    fn unparseable_numeric_is_missing() {
        let t = read_csv(
            "Age,Site\nN/A,a\n12.5,b\nabc,\n".as_bytes(),
            &schema(),
            &CsvOptions::default(),
        )
        .unwrap();
        let age = t.column("Age").unwrap();
        assert_eq!(age.missing, vec![true, false, true]);
        assert_eq!(age.numeric_at(1), Some(12.5));
        assert_eq!(t.column("Site").unwrap().missing, vec![false, false, true]);
    }

    #[test]
    fn columns_matched_by_name_not_position() {
        let t = read_csv(
            "Site,Age\nx,3\n".as_bytes(),
            &schema(),
            &CsvOptions::default(),
        )
        .unwrap();
        assert_eq!(t.column("Age").unwrap().numeric_at(0), Some(3.0));
        assert_eq!(t.column("Site").unwrap().text_at(0), Some("x"));
    }

    #[test]
    fn header_mismatch_lists_both_sides() {
        let r = read_csv(
            "Age,Extra\n1,2\n".as_bytes(),
            &schema(),
            &CsvOptions::default(),
        );
        match r {
            Err(DataError::HeaderMismatch { absent, unknown }) => {
                assert_eq!(absent, vec!["Site"]);
                assert_eq!(unknown, vec!["Extra"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        let r = load_csv(
            Path::new("/nonexistent/x.csv"),
            &schema(),
            &CsvOptions::default(),
        );
        assert!(matches!(r, Err(DataError::FileNotFound(_))));
    }

    #[test]
    fn sentinel_minus_999_is_missing() {
        let t = read_csv(
            "Age,Site\n-999,a\n".as_bytes(),
            &schema(),
            &CsvOptions::default(),
        )
        .unwrap();
        assert!(t.column("Age").unwrap().missing[0]);
    }
}

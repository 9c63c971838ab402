use serde::{Deserialize, Serialize};

use super::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub nullable: bool,
}

impl ColumnSchema {
    pub fn numeric(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: ColumnKind::Numeric,
            nullable: true,
        }
    }

    pub fn categorical(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: ColumnKind::Categorical,
            nullable: true,
        }
    }
}

/// Ordered column list with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ColumnSchema>", into = "Vec<ColumnSchema>")]
pub struct Schema {
    columns: Vec<ColumnSchema>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSchema>) -> Result<Self, DataError> {
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].iter().any(|o| o.name == c.name) {
                return Err(DataError::DuplicateColumn(c.name.clone()));
            }
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &[ColumnSchema] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }
}

impl TryFrom<Vec<ColumnSchema>> for Schema {
    type Error = DataError;

    fn try_from(columns: Vec<ColumnSchema>) -> Result<Self, Self::Error> {
        Schema::new(columns)
    }
}

impl From<Schema> for Vec<ColumnSchema> {
    fn from(s: Schema) -> Self {
        s.columns
    }
}

pub const DX_COLUMN: &str = "DX";
pub const SUBJECT_COLUMN: &str = "ScanDir ID";

/// Column names of the ADHD-200 phenotypic file, in file order.
pub const ADHD200_COLUMNS: [&str; 23] = [
    "ScanDir ID",
    "Site",
    "Gender",
    "Age",
    "Handedness",
    "DX",
    "Secondary Dx",
    "ADHD Measure",
    "ADHD Index",
    "Inattentive",
    "Hyper/Impulsive",
    "IQ Measure",
    "Verbal IQ",
    "Performance IQ",
    "Full2 IQ",
    "Full4 IQ",
    "Med Status",
    "QC_Rest_1",
    "QC_Rest_2",
    "QC_Rest_3",
    "QC_Rest_4",
    "QC_Anatomical_1",
    "QC_Anatomical_2",
];

/// The ADHD-200 phenotypic schema. `Secondary Dx` is free text; everything
/// else is coded numerically in the released files.
pub fn adhd200_schema() -> Schema {
    let cols = ADHD200_COLUMNS
        .iter()
        .map(|&n| {
            if n == "Secondary Dx" {
                ColumnSchema::categorical(n)
            } else {
                ColumnSchema::numeric(n)
            }
        })
        .collect();
    Schema::new(cols).expect("static schema has unique names")
}

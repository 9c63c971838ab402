use serde::{Deserialize, Serialize};

use super::{DataError, DataTable, DX_COLUMN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Binary,
    Multiclass,
}

impl Task {
    pub fn n_classes(self) -> usize {
        match self {
            Task::Binary => 2,
            Task::Multiclass => 4,
        }
    }

    pub fn class_names(self) -> Vec<String> {
        let names: &[&str] = match self {
            Task::Binary => &["TDC", "ADHD"],
            Task::Multiclass => &[
                "TDC",
                "ADHD-Combined",
                "ADHD-Hyperactive/Impulsive",
                "ADHD-Inattentive",
            ],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Default training fraction for the task's train/test split.
    pub fn default_train_frac(self) -> f64 {
        match self {
            Task::Binary => 0.75,
            Task::Multiclass => 0.80,
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Binary => "binary",
            Task::Multiclass => "multiclass",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(Task::Binary),
            "multiclass" => Ok(Task::Multiclass),
            other => Err(format!(
                "unknown task '{other}' (expected binary or multiclass)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    pub values: Vec<usize>,
    pub task: Task,
    pub class_names: Vec<String>,
}

impl LabelVector {
    pub fn new(values: Vec<usize>, task: Task) -> Result<Self, DataError> {
        if let Some(&bad) = values.iter().find(|&&v| v >= task.n_classes()) {
            return Err(DataError::InvalidDxValue {
                row: 0,
                value: bad.to_string(),
            });
        }
        Ok(Self {
            values,
            task,
            class_names: task.class_names(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.task.n_classes()
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes()];
        for &v in &self.values {
            c[v] += 1;
        }
        c
    }

    pub fn take(&self, idx: &[usize]) -> LabelVector {
        LabelVector {
            values: idx.iter().map(|&i| self.values[i]).collect(),
            task: self.task,
            class_names: self.class_names.clone(),
        }
    }

    /// Collapses a multiclass vector to TDC vs any ADHD subtype.
    pub fn to_binary(&self) -> LabelVector {
        LabelVector {
            values: self.values.iter().map(|&v| usize::from(v != 0)).collect(),
            task: Task::Binary,
            class_names: Task::Binary.class_names(),
        }
    }
}

/// Reads DX (0 = TDC, 1..=3 = ADHD subtypes) into a label vector.
pub fn make_labels(table: &DataTable, task: Task) -> Result<LabelVector, DataError> {
    let dx = table
        .column(DX_COLUMN)
        .ok_or_else(|| DataError::UnknownColumn(DX_COLUMN.to_string()))?;
    let mut values = Vec::with_capacity(table.n_rows());
    for row in 0..table.n_rows() {
        let v = dx
            .numeric_at(row)
            .filter(|v| [0.0, 1.0, 2.0, 3.0].contains(v))
            .ok_or_else(|| DataError::InvalidDxValue {
                row,
                value: dx
                    .numeric_at(row)
                    .map_or_else(|| "missing".to_string(), |v| v.to_string()),
            })? as usize;
        values.push(match task {
            Task::Binary => usize::from(v != 0),
            Task::Multiclass => v,
        });
    }
    Ok(LabelVector {
        values,
        task,
        class_names: task.class_names(),
    })
}

//! Synthetic ADHD-200-style phenotypic tables.
//!
//! The three rating scales (ADHD Index, Inattentive, Hyper/Impulsive) are
//! drawn from class-conditional Gaussians; every other column is
//! class-independent. `Full2 IQ` is a noisy copy of `Full4 IQ`, so the
//! correlation pruner has a redundant pair to remove.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{
    adhd200_schema, Column, ColumnValues, DataTable, LabelVector, Task, ADHD200_COLUMNS, DX_COLUMN,
    SUBJECT_COLUMN,
};
use crate::rng;

/// Class counts of the ADHD-200 phenotypic release (TDC, Combined,
/// Hyperactive/Impulsive, Inattentive).
pub const ADHD200_CLASS_COUNTS: [usize; 4] = [291, 116, 5, 61];

pub const MISSING_RATE: f64 = 0.02;

const SCALE_SD: f64 = 5.0;
// per class: (ADHD Index, Inattentive, Hyper/Impulsive)
const SCALE_MEANS: [[f64; 3]; 4] = [
    [44.0, 45.0, 45.0],
    [74.0, 72.0, 73.0],
    [68.0, 50.0, 74.0],
    [70.0, 73.0, 50.0],
];

const SECONDARY_DX: [&str; 5] = ["Anxiety", "Depression", "Learning Disorder", "None", "ODD"];

/// Generates a table in the ADHD-200 schema with `n_per_class[k]` rows of
/// class `k`, plus the matching multiclass labels.
pub fn synth_generate(n_per_class: [usize; 4], seed: u64) -> (DataTable, LabelVector) {
    let mut rng = rng::stream(seed);
    let mut classes: Vec<usize> = n_per_class
        .iter()
        .enumerate()
        .flat_map(|(k, &n)| std::iter::repeat_n(k, n))
        .collect();
    classes.shuffle(&mut rng);
    let n = classes.len();

    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let gauss = |rng: &mut rng::Stream, mean: f64, sd: f64| mean + sd * unit.sample(rng);

    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); ADHD200_COLUMNS.len()];
    let mut secondary: Vec<String> = Vec::with_capacity(n);
    let idx = |name: &str| {
        ADHD200_COLUMNS
            .iter()
            .position(|&c| c == name)
            .expect("known column")
    };

    for (row, &k) in classes.iter().enumerate() {
        let verbal = gauss(&mut rng, 105.0, 14.0).round();
        let performance = gauss(&mut rng, 105.0, 14.0).round();
        let full4 = ((verbal + performance) / 2.0 + gauss(&mut rng, 0.0, 1.5)).round();
        let values: [(&str, f64); 22] = [
            (SUBJECT_COLUMN, (1_000_000 + row) as f64),
            ("Site", rng.random_range(1..=8) as f64),
            ("Gender", rng.random_range(0..=1) as f64),
            (
                "Age",
                (rng.random_range(7.0..21.0_f64) * 100.0).round() / 100.0,
            ),
            ("Handedness", if rng.random_bool(0.9) { 1.0 } else { 0.0 }),
            (DX_COLUMN, k as f64),
            ("ADHD Measure", rng.random_range(1..=3) as f64),
            (
                "ADHD Index",
                gauss(&mut rng, SCALE_MEANS[k][0], SCALE_SD).round(),
            ),
            (
                "Inattentive",
                gauss(&mut rng, SCALE_MEANS[k][1], SCALE_SD).round(),
            ),
            (
                "Hyper/Impulsive",
                gauss(&mut rng, SCALE_MEANS[k][2], SCALE_SD).round(),
            ),
            ("IQ Measure", rng.random_range(1..=3) as f64),
            ("Verbal IQ", verbal),
            ("Performance IQ", performance),
            ("Full2 IQ", (full4 + gauss(&mut rng, 0.0, 2.0)).round()),
            ("Full4 IQ", full4),
            ("Med Status", rng.random_range(1..=2) as f64),
            ("QC_Rest_1", qc(&mut rng)),
            ("QC_Rest_2", qc(&mut rng)),
            ("QC_Rest_3", qc(&mut rng)),
            ("QC_Rest_4", qc(&mut rng)),
            ("QC_Anatomical_1", qc(&mut rng)),
            ("QC_Anatomical_2", qc(&mut rng)),
        ];
        for (name, v) in values {
            cols[idx(name)].push(v);
        }
        secondary.push(SECONDARY_DX[rng.random_range(0..SECONDARY_DX.len())].to_string());
    }

    let secondary_idx = idx("Secondary Dx");
    let mut columns: Vec<Column> = cols
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if i == secondary_idx {
                Column::text(std::mem::take(&mut secondary))
            } else {
                Column::numeric(v)
            }
        })
        .collect();

    // Knock out a fixed share of cells; subject id and DX stay intact.
    let eligible: Vec<usize> = (0..ADHD200_COLUMNS.len())
        .filter(|&i| ![SUBJECT_COLUMN, DX_COLUMN].contains(&ADHD200_COLUMNS[i]))
        .collect();
    let n_cells = eligible.len() * n;
    let n_missing = (n_cells as f64 * MISSING_RATE).round() as usize;
    for cell in sample(&mut rng, n_cells, n_missing).into_vec() {
        let col = &mut columns[eligible[cell / n]];
        let row = cell % n;
        col.missing[row] = true;
        match &mut col.values {
            ColumnValues::Numeric(v) => v[row] = f64::NAN,
            ColumnValues::Text(v) => v[row].clear(),
        }
    }

    let table = DataTable::new(adhd200_schema(), columns).expect("generated columns match schema");
    let labels = LabelVector {
        values: classes,
        task: Task::Multiclass,
        class_names: Task::Multiclass.class_names(),
    };
    (table, labels)
}

fn qc(rng: &mut rng::Stream) -> f64 {
    if rng.random_bool(0.85) {
        1.0
    } else {
        0.0
    }
}

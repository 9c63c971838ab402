//! Multiclass comparison table: this run's accuracies next to accuracies
//! reported in the literature for the same task.

use serde::{Deserialize, Serialize};
use tabx_core::data::Task;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::rundir::{csv_text, RunDir};
use crate::stages;

/// Previously published multiclass accuracies (percent). Quoted as
/// reported, never recomputed.
pub const CITED_ACCURACIES: [(&str, &str); 6] = [
    ("LR", "86.13"),
    ("SVM", "90.09"),
    ("RF", "84.15"),
    ("KNN", "77.27"),
    ("AdBoost", "69.30"),
    ("ANN", "85.14"),
];

pub const COMPARE_JSON: &str = "compare/comparison.json";
pub const COMPARE_CSV: &str = "compare/comparison.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    /// Accuracy in percent, two decimals.
    pub accuracy_percent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub this_run: Vec<ComparisonRow>,
    pub cited: Vec<ComparisonRow>,
    pub note: String,
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let rows = self
            .this_run
            .iter()
            .map(|r| ("this_run", r))
            .chain(self.cited.iter().map(|r| ("cited", r)))
            .map(|(section, r)| {
                vec![
                    section.to_string(),
                    r.model.clone(),
                    r.accuracy_percent.clone(),
                ]
            });
        csv_text(&["section", "model", "accuracy_percent"], rows)
    }
}

pub fn cited_rows() -> Vec<ComparisonRow> {
    CITED_ACCURACIES
        .iter()
        .map(|(m, a)| ComparisonRow {
            model: m.to_string(),
            accuracy_percent: a.to_string(),
        })
        .collect()
}

pub fn build(run: &RunDir, config: &RunConfig) -> Result<ComparisonTable> {
    if config.task != Task::Multiclass {
        return Err(CliError::Config(
            "the comparison table needs a multiclass run".into(),
        ));
    }
    let this_run = config
        .models
        .iter()
        .map(|&k| {
            let e = stages::read_eval(run, k)?;
            Ok(ComparisonRow {
                model: k.to_string(),
                accuracy_percent: format!("{:.2}", 100.0 * e.report.accuracy),
            })
        })
        .collect::<Result<_>>()?;
    Ok(ComparisonTable {
        this_run,
        cited: cited_rows(),
        note: "cited rows are published figures quoted verbatim, not recomputed".into(),
    })
}

pub fn stage_compare(run: &RunDir, config: &RunConfig) -> Result<ComparisonTable> {
    let table = build(run, config)?;
    run.write_json(COMPARE_JSON, &table)?;
    run.write_text(COMPARE_CSV, &table.to_csv())?;
    Ok(table)
}

//! Per-subject diagnosis reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use tabx_core::explain::{Attribution, PfiFeature};
use tabx_core::zoo::ModelKind;

use crate::config::RunConfig;
use crate::error::Result;
use crate::rundir::{csv_text, RunDir};
use crate::stages::{self, ConsensusTable, SubjectConsensus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelVote {
    pub model: ModelKind,
    pub predicted: usize,
    pub predicted_label: String,
    /// Probability the model gives its predicted class.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelExplanation {
    pub model: ModelKind,
    pub target_class: usize,
    pub base_value: f64,
    pub prediction: f64,
    /// Largest |phi| first, with signs.
    pub top_features: Vec<Attribution>,
    /// Global permutation importance, most important first.
    pub pfi_top: Vec<PfiFeature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationSection {
    pub models: Vec<ModelExplanation>,
}

/// Narrative sections. Only `findings` is generated; the rest are left
/// blank for the reviewing psychologist.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Narrative {
    pub findings: String,
    pub validation_checklist: String,
    pub clinical_judgment_notes: String,
    pub patient_communication_summary: String,
    pub areas_for_further_assessment: String,
    pub improvement_plan: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub subject: String,
    pub task: String,
    pub predictions: Vec<ModelVote>,
    pub votes: Vec<usize>,
    pub consensus: usize,
    pub consensus_label: String,
    pub consensus_probability: f64,
    /// Present exactly when the consensus is an ADHD class.
    pub explanation: Option<ExplanationSection>,
    pub narrative: Narrative,
}

/// Sources the report draws its explanation section from.
pub struct ExplainSources {
    pub per_model: Vec<(
        ModelKind,
        Option<stages::LocalShap>,
        Option<tabx_core::explain::PfiReport>,
    )>,
}

impl ExplainSources {
    /// Reads whatever explanation artifacts exist for the run's explained
    /// models; absent files simply leave gaps.
    pub fn load(run: &RunDir, config: &RunConfig) -> Self {
        let per_model = config
            .explained()
            .into_iter()
            .map(|k| {
                (
                    k,
                    stages::read_local_shap(run, k).ok(),
                    stages::read_pfi(run, k).ok(),
                )
            })
            .collect();
        Self { per_model }
    }
}

pub fn build_report(
    config: &RunConfig,
    table: &ConsensusTable,
    subject: &SubjectConsensus,
    sources: &ExplainSources,
) -> DiagnosisReport {
    let names = &table.class_names;
    let predictions: Vec<ModelVote> = subject
        .predictions
        .iter()
        .map(|p| ModelVote {
            model: p.model,
            predicted: p.predicted,
            predicted_label: names[p.predicted].clone(),
            probability: p.proba[p.predicted],
        })
        .collect();

    let explanation = subject.positive.then(|| ExplanationSection {
        models: sources
            .per_model
            .iter()
            .filter_map(|(kind, local, pfi)| {
                let e = local.as_ref()?.find(&subject.subject)?;
                Some(ModelExplanation {
                    model: *kind,
                    target_class: e.target_class,
                    base_value: e.base_value,
                    prediction: e.prediction,
                    top_features: e.top_k(config.top_k).into_iter().cloned().collect(),
                    pfi_top: pfi
                        .as_ref()
                        .map(|r| r.ranked().into_iter().take(config.top_k).cloned().collect())
                        .unwrap_or_default(),
                })
            })
            .collect(),
    });

    let label = &names[subject.consensus];
    let mut findings = format!(
        "Consensus {label}: {} of {} models, mean probability {:.3}.",
        subject.votes[subject.consensus],
        subject.predictions.len(),
        subject.mean_proba[subject.consensus]
    );
    match &explanation {
        Some(section) => {
            if let Some(first) = section.models.first() {
                let top: Vec<String> = first
                    .top_features
                    .iter()
                    .map(|a| format!("{} ({:+.4})", a.name, a.phi))
                    .collect();
                let _ = write!(
                    findings,
                    " Strongest {} attributions: {}.",
                    first.model,
                    top.join(", ")
                );
            }
        }
        None => findings.push_str(" No explanation is attached to a negative consensus."),
    }

    DiagnosisReport {
        subject: subject.subject.clone(),
        task: config.task.to_string(),
        predictions,
        votes: subject.votes.clone(),
        consensus: subject.consensus,
        consensus_label: label.clone(),
        consensus_probability: subject.mean_proba[subject.consensus],
        explanation,
        narrative: Narrative {
            findings,
            ..Narrative::default()
        },
    }
}

impl DiagnosisReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Diagnosis report: subject {}", self.subject);
        let _ = writeln!(out, "Task: {}", self.task);
        let _ = writeln!(out);
        let _ = writeln!(out, "Model predictions");
        for p in &self.predictions {
            let _ = writeln!(
                out,
                "  {:<12} {:<28} p = {:.4}",
                p.model.name(),
                p.predicted_label,
                p.probability
            );
        }
        let _ = writeln!(
            out,
            "Consensus: {} (class {}, mean probability {:.4})",
            self.consensus_label, self.consensus, self.consensus_probability
        );
        if let Some(section) = &self.explanation {
            let _ = writeln!(out);
            let _ = writeln!(out, "Explanation");
            if section.models.is_empty() {
                let _ = writeln!(out, "  (no explanation artifacts available)");
            }
            for m in &section.models {
                let _ = writeln!(
                    out,
                    "  {} (base {:.4}, output {:.4})",
                    m.model, m.base_value, m.prediction
                );
                for a in &m.top_features {
                    let _ = writeln!(
                        out,
                        "    {:<22} value {:>10.4}  phi {:+.4}",
                        a.name, a.value, a.phi
                    );
                }
                if !m.pfi_top.is_empty() {
                    let _ = writeln!(out, "    permutation importance:");
                    for f in &m.pfi_top {
                        let _ = writeln!(out, "      {:<20} {:+.4} ± {:.4}", f.name, f.mean, f.std);
                    }
                }
            }
        }
        let sections = [
            ("Findings", &self.narrative.findings),
            ("Validation Checklist", &self.narrative.validation_checklist),
            (
                "Clinical Judgment Notes",
                &self.narrative.clinical_judgment_notes,
            ),
            (
                "Patient Communication Summary",
                &self.narrative.patient_communication_summary,
            ),
            (
                "Areas for Further Assessment",
                &self.narrative.areas_for_further_assessment,
            ),
            ("Improvement Plan", &self.narrative.improvement_plan),
        ];
        for (title, body) in sections {
            let _ = writeln!(out);
            let _ = writeln!(out, "{title}");
            let _ = writeln!(
                out,
                "  {}",
                if body.is_empty() {
                    "[to be completed by the reviewing clinician]"
                } else {
                    body
                }
            );
        }
        out
    }
}

pub fn report_json_path(subject: &str) -> String {
    format!("reports/{subject}.json")
}

pub fn report_text_path(subject: &str) -> String {
    format!("reports/{subject}.txt")
}

/// Builds and writes the report of one subject.
pub fn write_report(run: &RunDir, config: &RunConfig, subject: &str) -> Result<DiagnosisReport> {
    let table = stages::read_consensus(run)?;
    let entry = table.find(subject)?;
    let report = build_report(config, &table, entry, &ExplainSources::load(run, config));
    run.write_json(&report_json_path(subject), &report)?;
    run.write_text(&report_text_path(subject), &report.render_text())?;
    Ok(report)
}

/// Reports for every test subject plus an index.
pub fn stage_reports(run: &RunDir, config: &RunConfig) -> Result<Vec<DiagnosisReport>> {
    let table = stages::read_consensus(run)?;
    let sources = ExplainSources::load(run, config);
    let mut reports = Vec::with_capacity(table.subjects.len());
    for s in &table.subjects {
        let report = build_report(config, &table, s, &sources);
        run.write_json(&report_json_path(&s.subject), &report)?;
        run.write_text(&report_text_path(&s.subject), &report.render_text())?;
        reports.push(report);
    }
    let rows = reports.iter().map(|r| {
        vec![
            r.subject.clone(),
            r.consensus.to_string(),
            r.consensus_label.clone(),
            format!("{}", r.consensus_probability),
            r.explanation.is_some().to_string(),
        ]
    });
    run.write_text(
        "reports/index.csv",
        &csv_text(
            &["subject", "consensus", "label", "probability", "explained"],
            rows,
        ),
    )?;
    Ok(reports)
}

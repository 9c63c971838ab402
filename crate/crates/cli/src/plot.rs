//! SVG plots, each with a CSV sidecar holding the plotted data.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tabx_core::eval::ConfusionMatrix;
use tabx_core::explain::PfiReport;
use tabx_core::nn::{NeuralSpec, TrainingHistory};
use tabx_core::zoo::{ModelKind, TrainedState};

use crate::compare::{self, ComparisonTable};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::rundir::{csv_text, RunDir};
use crate::stages::{self, LocalShap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    TrainingCurves,
    ConfusionHeatmap,
    PfiBars,
    ShapSummary,
    ComparisonTable,
    Architecture,
}

impl PlotKind {
    pub const ALL: [PlotKind; 6] = [
        PlotKind::TrainingCurves,
        PlotKind::ConfusionHeatmap,
        PlotKind::PfiBars,
        PlotKind::ShapSummary,
        PlotKind::ComparisonTable,
        PlotKind::Architecture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::TrainingCurves => "training_curves",
            PlotKind::ConfusionHeatmap => "confusion_heatmap",
            PlotKind::PfiBars => "pfi_bars",
            PlotKind::ShapSummary => "shap_summary",
            PlotKind::ComparisonTable => "comparison_table",
            PlotKind::Architecture => "architecture",
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlotKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| CliError::Config(format!("unknown plot kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotArtifact {
    pub kind: PlotKind,
    /// File stem under `plots/`.
    pub name: String,
    pub svg: String,
    pub sidecar: String,
}

impl PlotArtifact {
    pub fn svg_path(&self) -> String {
        format!("plots/{}.svg", self.name)
    }

    pub fn sidecar_path(&self) -> String {
        format!("plots/{}.csv", self.name)
    }
}

// ---------------------------------------------------------------- svg

const BLUE: &str = "#1f77b4";
const ORANGE: &str = "#ff7f0e";
const GREY: &str = "#888888";

struct Svg {
    width: f64,
    height: f64,
    body: String,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}" stroke="none"/>"#
        );
    }

    fn outline(&mut self, x: f64, y: f64, w: f64, h: f64) {
        let _ = writeln!(
            self.body,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#333333"/>"##
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="1"/>"#
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{fill}"/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="{size:.1}" font-family="sans-serif" text-anchor="{anchor}">{}</text>"#,
            esc(s)
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// `t ∈ [0, 1]` from blue to red.
fn diverging(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(31.0, 214.0),
        mix(119.0, 39.0),
        mix(180.0, 40.0)
    )
}

/// `t ∈ [0, 1]` from white to dark blue.
fn sequential(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(247.0, 8.0),
        mix(251.0, 48.0),
        mix(255.0, 107.0)
    )
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Line panel with axes at `(x0, y0)`; every series shares the y range.
fn line_panel(
    svg: &mut Svg,
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    title: &str,
    series: &[(&str, &str, &[f64])],
) {
    svg.outline(x0, y0, w, h);
    svg.text(x0 + w / 2.0, y0 - 8.0, 13.0, "middle", title);
    let (lo, hi) = range(series.iter().flat_map(|s| s.2.iter().copied()));
    let n = series.iter().map(|s| s.2.len()).max().unwrap_or(0);
    let sx = |i: usize| {
        x0 + if n > 1 {
            w * i as f64 / (n - 1) as f64
        } else {
            w / 2.0
        }
    };
    let sy = |v: f64| y0 + h - h * (v - lo) / (hi - lo);
    svg.text(x0 - 4.0, y0 + 4.0, 10.0, "end", &format!("{hi:.3}"));
    svg.text(x0 - 4.0, y0 + h, 10.0, "end", &format!("{lo:.3}"));
    svg.text(x0 + w, y0 + h + 14.0, 10.0, "end", &format!("epoch {n}"));
    for (k, (color, label, values)) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (sx(i), sy(v)))
            .collect();
        svg.polyline(&pts, color);
        let ly = y0 + 14.0 + 14.0 * k as f64;
        svg.line(x0 + w - 90.0, ly - 4.0, x0 + w - 74.0, ly - 4.0, color);
        svg.text(x0 + w - 70.0, ly, 10.0, "start", label);
    }
}

// ---------------------------------------------------------------- plots

pub fn training_curves(model: ModelKind, h: &TrainingHistory) -> PlotArtifact {
    let mut svg = Svg::new(820.0, 320.0);
    svg.text(
        410.0,
        20.0,
        15.0,
        "middle",
        &format!("{model} training curves"),
    );
    line_panel(
        &mut svg,
        60.0,
        50.0,
        320.0,
        230.0,
        "loss",
        &[
            (BLUE, "train", &h.train_loss),
            (ORANGE, "validation", &h.val_loss),
        ],
    );
    line_panel(
        &mut svg,
        470.0,
        50.0,
        320.0,
        230.0,
        "accuracy",
        &[
            (BLUE, "train", &h.train_accuracy),
            (ORANGE, "validation", &h.val_accuracy),
        ],
    );
    let rows = (0..h.epochs()).map(|e| {
        vec![
            (e + 1).to_string(),
            format!("{}", h.train_loss[e]),
            format!("{}", h.train_accuracy[e]),
            format!("{}", h.val_loss[e]),
            format!("{}", h.val_accuracy[e]),
        ]
    });
    PlotArtifact {
        kind: PlotKind::TrainingCurves,
        name: format!("training_curves_{model}"),
        svg: svg.finish(),
        sidecar: csv_text(
            &[
                "epoch",
                "train_loss",
                "train_accuracy",
                "val_loss",
                "val_accuracy",
            ],
            rows,
        ),
    }
}

pub fn confusion_heatmap(
    model: ModelKind,
    cm: &ConfusionMatrix,
    class_names: &[String],
) -> PlotArtifact {
    let cell = 70.0;
    let (x0, y0) = (200.0, 70.0);
    let k = cm.k;
    let mut svg = Svg::new(x0 + cell * k as f64 + 40.0, y0 + cell * k as f64 + 60.0);
    svg.text(
        x0 + cell * k as f64 / 2.0,
        24.0,
        15.0,
        "middle",
        &format!("{model} confusion matrix"),
    );
    svg.text(
        x0 + cell * k as f64 / 2.0,
        50.0,
        11.0,
        "middle",
        "predicted class",
    );
    let max = cm
        .counts
        .iter()
        .flatten()
        .copied()
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    for t in 0..k {
        svg.text(
            x0 - 8.0,
            y0 + cell * (t as f64 + 0.5) + 4.0,
            11.0,
            "end",
            &class_names[t],
        );
        svg.text(
            x0 + cell * (t as f64 + 0.5),
            y0 + cell * k as f64 + 16.0,
            11.0,
            "middle",
            &t.to_string(),
        );
        for p in 0..k {
            let n = cm.counts[t][p];
            let (x, y) = (x0 + cell * p as f64, y0 + cell * t as f64);
            svg.rect(x, y, cell, cell, &sequential(n as f64 / max));
            svg.outline(x, y, cell, cell);
            let ink = if n as f64 / max > 0.5 {
                "white"
            } else {
                "black"
            };
            let _ = writeln!(
                svg.body,
                r#"<text x="{:.2}" y="{:.2}" font-size="14.0" font-family="sans-serif" text-anchor="middle" fill="{ink}">{n}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0 + 5.0
            );
        }
    }
    let rows = (0..k)
        .flat_map(|t| (0..k).map(move |p| (t, p)))
        .map(|(t, p)| vec![t.to_string(), p.to_string(), cm.counts[t][p].to_string()]);
    PlotArtifact {
        kind: PlotKind::ConfusionHeatmap,
        name: format!("confusion_heatmap_{model}"),
        svg: svg.finish(),
        sidecar: csv_text(&["true_class", "predicted_class", "count"], rows),
    }
}

pub fn pfi_bars(model: ModelKind, report: &PfiReport) -> PlotArtifact {
    let ranked = report.ranked();
    let row_h = 22.0;
    let (x0, y0, w) = (190.0, 60.0, 420.0);
    let mut svg = Svg::new(x0 + w + 60.0, y0 + row_h * ranked.len() as f64 + 50.0);
    svg.text(
        (x0 + w) / 2.0 + 40.0,
        24.0,
        15.0,
        "middle",
        &format!(
            "{model} permutation importance ({}, {} repeats)",
            report.metric, report.repeats
        ),
    );
    let (lo, hi) = range(
        ranked
            .iter()
            .flat_map(|f| [f.mean - f.std, f.mean + f.std, 0.0]),
    );
    let sx = |v: f64| x0 + w * (v - lo) / (hi - lo);
    svg.line(
        sx(0.0),
        y0 - 6.0,
        sx(0.0),
        y0 + row_h * ranked.len() as f64,
        GREY,
    );
    for (i, f) in ranked.iter().enumerate() {
        let y = y0 + row_h * i as f64;
        svg.text(x0 - 8.0, y + row_h * 0.65, 11.0, "end", &f.name);
        let (a, b) = (sx(0.0), sx(f.mean));
        svg.rect(a.min(b), y + 3.0, (b - a).abs(), row_h - 6.0, BLUE);
        svg.line(
            sx(f.mean - f.std),
            y + row_h / 2.0,
            sx(f.mean + f.std),
            y + row_h / 2.0,
            "#333333",
        );
    }
    svg.text(
        sx(lo),
        y0 + row_h * ranked.len() as f64 + 16.0,
        10.0,
        "start",
        &format!("{lo:.3}"),
    );
    svg.text(
        sx(hi),
        y0 + row_h * ranked.len() as f64 + 16.0,
        10.0,
        "end",
        &format!("{hi:.3}"),
    );
    PlotArtifact {
        kind: PlotKind::PfiBars,
        name: format!("pfi_bars_{model}"),
        svg: svg.finish(),
        sidecar: report.to_csv(),
    }
}

/// Beeswarm-style summary: one row per feature (by mean |phi|), one dot
/// per explained subject at its phi, colored by the feature's value.
pub fn shap_summary(model: ModelKind, local: &LocalShap) -> PlotArtifact {
    let names: Vec<String> = local
        .subjects
        .first()
        .map(|s| {
            s.explanation
                .features
                .iter()
                .map(|a| a.name.clone())
                .collect()
        })
        .unwrap_or_default();
    let d = names.len();
    let mut mean_abs = vec![0.0; d];
    for s in &local.subjects {
        for (m, a) in mean_abs.iter_mut().zip(&s.explanation.features) {
            *m += a.phi.abs();
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| mean_abs[b].total_cmp(&mean_abs[a]));

    let row_h = 22.0;
    let (x0, y0, w) = (190.0, 60.0, 460.0);
    let mut svg = Svg::new(x0 + w + 40.0, y0 + row_h * d.max(1) as f64 + 60.0);
    svg.text(
        (x0 + w) / 2.0 + 40.0,
        24.0,
        15.0,
        "middle",
        &format!("{model} SHAP summary ({} subjects)", local.subjects.len()),
    );
    let (lo, hi) = range(
        local
            .subjects
            .iter()
            .flat_map(|s| s.explanation.features.iter().map(|a| a.phi))
            .chain([0.0]),
    );
    let sx = |v: f64| x0 + w * (v - lo) / (hi - lo);
    svg.line(sx(0.0), y0 - 6.0, sx(0.0), y0 + row_h * d as f64, GREY);
    let mut rows = Vec::new();
    for (slot, &f) in order.iter().enumerate() {
        let y = y0 + row_h * (slot as f64 + 0.5);
        svg.text(x0 - 8.0, y + 4.0, 11.0, "end", &names[f]);
        let (vlo, vhi) = range(
            local
                .subjects
                .iter()
                .map(|s| s.explanation.features[f].value),
        );
        for (i, s) in local.subjects.iter().enumerate() {
            let a = &s.explanation.features[f];
            // Deterministic vertical jitter keeps dots from stacking.
            let jitter = ((i * 7919) % 11) as f64 - 5.0;
            svg.circle(
                sx(a.phi),
                y + jitter,
                2.5,
                &diverging((a.value - vlo) / (vhi - vlo)),
            );
            rows.push(vec![
                a.name.clone(),
                s.subject.clone(),
                format!("{}", a.phi),
                format!("{}", a.value),
            ]);
        }
    }
    svg.text(
        sx(lo),
        y0 + row_h * d as f64 + 16.0,
        10.0,
        "start",
        &format!("{lo:.3}"),
    );
    svg.text(
        sx(hi),
        y0 + row_h * d as f64 + 16.0,
        10.0,
        "end",
        &format!("{hi:.3}"),
    );
    svg.text(
        x0 + w / 2.0,
        y0 + row_h * d as f64 + 34.0,
        10.0,
        "middle",
        "phi (blue = low value, red = high value)",
    );
    PlotArtifact {
        kind: PlotKind::ShapSummary,
        name: format!("shap_summary_{model}"),
        svg: svg.finish(),
        sidecar: csv_text(&["feature", "subject", "phi", "value"], rows),
    }
}

pub fn comparison_table(table: &ComparisonTable) -> PlotArtifact {
    let row_h = 24.0;
    let n = table.this_run.len() + table.cited.len() + 2;
    let mut svg = Svg::new(420.0, 60.0 + row_h * n as f64 + 20.0);
    svg.text(210.0, 24.0, 15.0, "middle", "Multiclass accuracy (%)");
    let mut y = 60.0;
    for (title, rows) in [
        ("This run", &table.this_run),
        ("Cited (published, not recomputed)", &table.cited),
    ] {
        svg.text(40.0, y, 12.0, "start", title);
        svg.line(40.0, y + 5.0, 380.0, y + 5.0, GREY);
        y += row_h;
        for r in rows {
            svg.text(60.0, y, 12.0, "start", &r.model);
            svg.text(360.0, y, 12.0, "end", &r.accuracy_percent);
            y += row_h;
        }
    }
    PlotArtifact {
        kind: PlotKind::ComparisonTable,
        name: "comparison_table".into(),
        svg: svg.finish(),
        sidecar: table.to_csv(),
    }
}

/// Layer diagram listing each layer's type, units and parameter count.
pub fn architecture(model: ModelKind, spec: &NeuralSpec) -> PlotArtifact {
    let counts = spec.layer_param_counts();
    let box_h = 34.0;
    let gap = 14.0;
    let mut svg = Svg::new(460.0, 90.0 + (box_h + gap) * (spec.layers.len() + 1) as f64);
    svg.text(
        230.0,
        24.0,
        15.0,
        "middle",
        &format!("{model} ({} parameters)", spec.param_count()),
    );
    let mut y = 50.0;
    svg.outline(80.0, y, 300.0, box_h);
    svg.text(
        230.0,
        y + 21.0,
        12.0,
        "middle",
        &format!("input ({} features)", spec.input_dim),
    );
    let mut rows = Vec::new();
    for (i, (layer, params)) in spec.layers.iter().zip(&counts).enumerate() {
        svg.line(230.0, y + box_h, 230.0, y + box_h + gap, "#333333");
        y += box_h + gap;
        let detail = match layer.units() {
            Some(u) => format!("{} {u} units, {params} params", layer.name()),
            None => match layer {
                tabx_core::nn::LayerSpec::Dropout { rate } => format!("dropout rate {rate}"),
                other => other.name().to_string(),
            },
        };
        svg.rect(
            80.0,
            y,
            300.0,
            box_h,
            if layer.is_recurrent() {
                "#fde0c5"
            } else {
                "#dbe9f6"
            },
        );
        svg.outline(80.0, y, 300.0, box_h);
        svg.text(230.0, y + 21.0, 12.0, "middle", &detail);
        rows.push(vec![
            i.to_string(),
            layer.name().to_string(),
            layer.units().map(|u| u.to_string()).unwrap_or_default(),
            params.to_string(),
        ]);
    }
    PlotArtifact {
        kind: PlotKind::Architecture,
        name: format!("architecture_{model}"),
        svg: svg.finish(),
        sidecar: csv_text(&["index", "layer", "units", "params"], rows),
    }
}

// ---------------------------------------------------------------- run-level

/// Every plot of `kind` the run has data for.
pub fn collect(run: &RunDir, config: &RunConfig, kind: PlotKind) -> Result<Vec<PlotArtifact>> {
    let mut out = Vec::new();
    match kind {
        PlotKind::TrainingCurves => {
            for &m in config.models.iter().filter(|m| m.is_neural()) {
                if run.exists(&stages::history_path(m)) {
                    out.push(training_curves(m, &stages::load_history(run, m)?));
                }
            }
        }
        PlotKind::ConfusionHeatmap => {
            let names = config.task.class_names();
            for &m in &config.models {
                if run.exists(&stages::eval_path(m)) {
                    out.push(confusion_heatmap(
                        m,
                        &stages::read_eval(run, m)?.report.confusion,
                        &names,
                    ));
                }
            }
        }
        PlotKind::PfiBars => {
            for m in config.explained() {
                if run.exists(&stages::explain_path(m, stages::PFI_JSON)) {
                    out.push(pfi_bars(m, &stages::read_pfi(run, m)?));
                }
            }
        }
        PlotKind::ShapSummary => {
            for m in config.explained() {
                if run.exists(&stages::explain_path(m, stages::SHAP_LOCAL_JSON)) {
                    out.push(shap_summary(m, &stages::read_local_shap(run, m)?));
                }
            }
        }
        PlotKind::ComparisonTable => {
            if run.exists(compare::COMPARE_JSON) {
                out.push(comparison_table(&run.read_json(compare::COMPARE_JSON)?));
            }
        }
        PlotKind::Architecture => {
            for &m in config.models.iter().filter(|m| m.is_neural()) {
                if run.exists(&stages::model_path(m)) {
                    if let TrainedState::Neural(ck) = &stages::load_model(run, m)?.state {
                        out.push(architecture(m, &ck.spec));
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::MissingData(format!(
            "no data in the run for a {kind} plot"
        )));
    }
    Ok(out)
}

pub fn write(run: &RunDir, plots: &[PlotArtifact]) -> Result<()> {
    for p in plots {
        run.write_text(&p.svg_path(), &p.svg)?;
        run.write_text(&p.sidecar_path(), &p.sidecar)?;
    }
    Ok(())
}

/// Plots every kind the run has data for.
pub fn stage_plots(run: &RunDir, config: &RunConfig) -> Result<usize> {
    let mut n = 0;
    for kind in PlotKind::ALL {
        match collect(run, config, kind) {
            Ok(plots) => {
                write(run, &plots)?;
                n += plots.len();
            }
            Err(CliError::MissingData(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(n)
}

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tabx::config::RunConfig;
use tabx::manifest;
use tabx::rundir::parse_csv;
use tabx::CliError;
use tabx_core::data::Task;
use tabx_core::zoo::{BoostConfig, ModelKind};

fn fast_config(task: Task) -> RunConfig {
    RunConfig {
        task,
        epochs: 3,
        shap_samples: 64,
        background_size: 4,
        pfi_repeats: 2,
        n_trees: 5,
        boost: BoostConfig {
            n_rounds: 5,
            ..BoostConfig::default()
        },
        synth_counts: [40, 20, 5, 15],
        ..RunConfig::default()
    }
}

fn write_config(dir: &Path, config: &RunConfig) -> PathBuf {
    let path = dir.join("config-in.json");
    fs::write(&path, config.to_json()).unwrap();
    path
}

fn tabx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tabx"))
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn pipeline(dir: &Path, config: &RunConfig, name: &str) -> PathBuf {
    let out = dir.join(name);
    let cfg = write_config(dir, config);
    let o = tabx(&["pipeline", "--config", s(&cfg), "--out", s(&out)]);
    assert!(
        o.status.success(),
        "pipeline failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    out
}

/// Every file under `root`, keyed by relative path.
fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_string_lossy().into_owned(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    parse_csv(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn binary_pipeline_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = pipeline(dir.path(), &fast_config(Task::Binary), "run");
    let files = snapshot(&out);

    for kind in ModelKind::ALL {
        assert!(
            files.contains_key(&format!("eval/{kind}.json")),
            "{kind} eval"
        );
        assert!(
            files.contains_key(&format!("models/{kind}.json")),
            "{kind} model"
        );
        assert_eq!(
            files.contains_key(&format!("models/{kind}_history.json")),
            kind.is_neural(),
            "{kind} history"
        );
        for f in [
            "pfi.json",
            "pfi.csv",
            "shap_local.json",
            "shap_global.json",
            "beeswarm.csv",
        ] {
            assert!(
                files.contains_key(&format!("explain/{kind}/{f}")),
                "{kind} {f}"
            );
        }
    }
    let histories = files
        .keys()
        .filter(|k| k.ends_with("_history.json"))
        .count();
    assert_eq!(histories, 5);
    let (header, rows) = csv_rows(&out.join("eval/comparison.csv"));
    assert_eq!(
        header.join(","),
        "model,accuracy,precision,recall,f1,roc_auc"
    );
    assert_eq!(rows.len(), 8);
    assert!(
        !files.keys().any(|k| k.starts_with("compare/")),
        "comparison table is multiclass only"
    );

    let hash = RunConfig::load(&out.join("config.json")).unwrap().hash();
    for (path, bytes) in &files {
        if path.ends_with(".json") && path != "config.json" {
            let v: Value = serde_json::from_slice(bytes).unwrap();
            assert_eq!(v["schema_version"], 1, "{path}");
            assert_eq!(v["config_hash"], hash.as_str(), "{path}");
        }
    }
    manifest::verify(&out).unwrap();
    let siblings: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert!(
        siblings
            .iter()
            .all(|n| !n.to_string_lossy().starts_with(".tabx-staging")),
        "staging dir left behind"
    );
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = fast_config(Task::Binary);
    let a = snapshot(&pipeline(dir.path(), &config, "a"));
    let b = snapshot(&pipeline(dir.path(), &config, "b"));
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    for (path, bytes) in &a {
        assert!(bytes == &b[path], "{path} differs between runs");
    }
    let c = snapshot(&pipeline(dir.path(), &RunConfig { seed: 7, ..config }, "c"));
    assert_ne!(a["data/split.json"], c["data/split.json"]);
}

#[test]
fn staged_verbs_match_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let config = fast_config(Task::Multiclass);
    let whole = snapshot(&pipeline(dir.path(), &config, "whole"));
    let cfg = write_config(dir.path(), &config);
    let out = dir.path().join("staged");
    let o = tabx(&["prep", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for verb in [
        "select", "train", "eval", "explain", "report", "compare", "plot",
    ] {
        let o = tabx(&[verb, "--out", s(&out)]);
        assert!(
            o.status.success(),
            "{verb}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let staged = snapshot(&out);
    assert_eq!(
        whole.keys().collect::<Vec<_>>(),
        staged.keys().collect::<Vec<_>>()
    );
    for (path, bytes) in &whole {
        assert!(bytes == &staged[path], "{path} differs");
    }
}

#[test]
fn empty_model_list_fails_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &RunConfig {
            models: vec![],
            ..fast_config(Task::Binary)
        },
    );
    let out = dir.path().join("run");
    let o = tabx(&["pipeline", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let missing = dir.path().join("nope.csv");
    assert_eq!(
        tabx(&["pipeline", "--data", s(&missing), "--out", s(&out)])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        tabx(&["pipeline", "--models", "RF,SVM", "--out", s(&out)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        tabx(&["pipeline", "--threshold", "1.5", "--out", s(&out)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        tabx(&["pipeline", "--task", "ternary", "--out", s(&out)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(tabx(&["eval", "--out", s(&out)]).status.code(), Some(3));
    assert!(!out.exists());

    let o = tabx(&["prep", "--exclude-features", "Shoe Size", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_run_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    // 4 coalition samples cannot fit two dozen features: fails in the explain stage.
    let cfg = write_config(
        dir.path(),
        &RunConfig {
            shap_samples: 4,
            ..fast_config(Task::Binary)
        },
    );
    let out = dir.path().join("run");
    let o = tabx(&["pipeline", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(!out.exists());
    let left: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(
        left.len(),
        1,
        "only the config file should remain: {left:?}"
    );
}

#[test]
fn manifest_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fast_config(Task::Binary);
    config.models = vec![ModelKind::Dt, ModelKind::Exgb];
    let out = pipeline(dir.path(), &config, "run");
    manifest::verify(&out).unwrap();

    let target = out.join("eval/DT.json");
    let original = fs::read(&target).unwrap();
    let mut edited = original.clone();
    let pos = edited.iter().position(|&b| b == b'0').unwrap();
    edited[pos] = b'1';
    fs::write(&target, &edited).unwrap();
    assert!(
        matches!(manifest::verify(&out), Err(CliError::Integrity(m)) if m.contains("eval/DT.json"))
    );
    fs::write(&target, &original).unwrap();
    manifest::verify(&out).unwrap();

    fs::write(out.join("eval/extra.csv"), "x\n").unwrap();
    assert!(
        matches!(manifest::verify(&out), Err(CliError::Integrity(m)) if m.contains("not listed"))
    );
    fs::remove_file(out.join("eval/extra.csv")).unwrap();

    fs::remove_file(out.join("plots/pfi_bars_DT.svg")).unwrap();
    assert!(matches!(manifest::verify(&out), Err(CliError::Integrity(m)) if m.contains("missing")));
}

#[test]
fn explanation_section_tracks_positive_consensus() {
    let dir = tempfile::tempdir().unwrap();
    let out = pipeline(dir.path(), &fast_config(Task::Multiclass), "run");
    let (_, index) = csv_rows(&out.join("reports/index.csv"));
    let (mut pos, mut neg) = (0, 0);
    for row in &index {
        let report = json(&out.join(format!("reports/{}.json", row[0])));
        let positive = report["consensus"].as_u64().unwrap() != 0;
        assert_eq!(
            !report["explanation"].is_null(),
            positive,
            "subject {}",
            row[0]
        );
        assert_eq!(row[4], positive.to_string());
        if positive {
            pos += 1;
            let models = report["explanation"]["models"].as_array().unwrap();
            assert_eq!(models.len(), 8);
            for m in models {
                assert_eq!(m["top_features"].as_array().unwrap().len(), 5);
                assert_eq!(m["target_class"], report["consensus"]);
            }
        } else {
            neg += 1;
        }
        let narrative = report["narrative"].as_object().unwrap();
        assert_eq!(narrative.len(), 6);
        assert!(!narrative["findings"].as_str().unwrap().is_empty());
        for key in [
            "validation_checklist",
            "clinical_judgment_notes",
            "patient_communication_summary",
            "areas_for_further_assessment",
            "improvement_plan",
        ] {
            assert_eq!(narrative[key], "", "{key}");
        }
    }
    assert!(pos > 0 && neg > 0, "{pos} positive, {neg} negative");
}

#[test]
fn report_verb_for_one_subject() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fast_config(Task::Binary);
    config.models = vec![ModelKind::Dt, ModelKind::Rf];
    let out = pipeline(dir.path(), &config, "run");
    let (_, index) = csv_rows(&out.join("reports/index.csv"));
    let o = tabx(&["report", "--subject", &index[0][0], "--out", s(&out)]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with(&format!("Diagnosis report: subject {}", index[0][0])));
    assert!(text.contains("Improvement Plan"));
    manifest::verify(&out).unwrap();

    let o = tabx(&["report", "--subject", "no-such-subject", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown subject"));
}

#[test]
fn multiclass_comparison_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let config = fast_config(Task::Multiclass);
    let out = pipeline(dir.path(), &config, "run");

    let (header, rows) = csv_rows(&out.join("compare/comparison.csv"));
    assert_eq!(header, ["section", "model", "accuracy_percent"]);
    let ours: Vec<_> = rows.iter().filter(|r| r[0] == "this_run").collect();
    let cited: Vec<_> = rows
        .iter()
        .filter(|r| r[0] == "cited")
        .map(|r| (r[1].as_str(), r[2].as_str()))
        .collect();
    assert_eq!(ours.len(), 8);
    assert_eq!(
        cited,
        [
            ("LR", "86.13"),
            ("SVM", "90.09"),
            ("RF", "84.15"),
            ("KNN", "77.27"),
            ("AdBoost", "69.30"),
            ("ANN", "85.14")
        ]
    );

    let plots = out.join("plots");
    let svgs = fs::read_dir(&plots)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "svg");
    for svg in svgs {
        let svg = svg.unwrap().path();
        assert!(
            svg.with_extension("csv").is_file(),
            "{} has no sidecar",
            svg.display()
        );
        assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    }

    let (_, curve) = csv_rows(&plots.join("training_curves_HyExDNN-RNN.csv"));
    assert_eq!(curve.len(), config.epochs);

    let test_size = csv_rows(&out.join("data/test.csv")).1.len();
    for kind in ModelKind::ALL {
        let (_, cells) = csv_rows(&plots.join(format!("confusion_heatmap_{kind}.csv")));
        assert_eq!(cells.len(), 16);
        let total: usize = cells.iter().map(|c| c[2].parse::<usize>().unwrap()).sum();
        assert_eq!(total, test_size, "{kind}");
    }

    let (_, layers) = csv_rows(&plots.join("architecture_HyExDNN-RNN.csv"));
    let units: Vec<&str> = layers
        .iter()
        .map(|l| l[2].as_str())
        .filter(|u| !u.is_empty())
        .collect();
    assert_eq!(units, ["256", "128", "64", "32", "16", "4"]);

    let o = tabx(&["plot", "--kind", "pie_chart", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn binary_run_has_no_comparison_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fast_config(Task::Binary);
    config.models = vec![ModelKind::Dt];
    let out = pipeline(dir.path(), &config, "run");
    assert_eq!(tabx(&["compare", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(
        tabx(&["plot", "--kind", "comparison_table", "--out", s(&out)])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        tabx(&["plot", "--kind", "training_curves", "--out", s(&out)])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn synth_csv_reproduces_the_builtin_source() {
    let dir = tempfile::tempdir().unwrap();
    let config = fast_config(Task::Binary);
    let csv = dir.path().join("synth.csv");
    let counts = config.synth_counts.map(|c| c.to_string()).join(",");
    assert!(tabx(&["synth", "--counts", &counts, "--out", s(&csv)])
        .status
        .success());

    let mut from_file = config.clone();
    from_file.data = s(&csv).to_string();
    from_file.models = vec![ModelKind::Dt];
    let mut builtin = config;
    builtin.models = vec![ModelKind::Dt];
    let a = pipeline(dir.path(), &from_file, "file");
    let b = pipeline(dir.path(), &builtin, "builtin");
    for f in [
        "data/raw.csv",
        "data/train.csv",
        "data/test.csv",
        "eval/DT.json",
    ] {
        let (x, y) = (
            fs::read_to_string(a.join(f)).unwrap(),
            fs::read_to_string(b.join(f)).unwrap(),
        );
        if f.ends_with(".csv") {
            assert_eq!(x, y, "{f}");
        } else {
            // Only the config hash differs, since the data source is spelled differently.
            assert_eq!(json(&a.join(f))["accuracy"], json(&b.join(f))["accuracy"]);
        }
    }
}

#[test]
fn excluded_features_leave_the_model_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = tabx(&[
        "prep",
        "--exclude-features",
        "ScanDir ID,Secondary Dx",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, _) = csv_rows(&out.join("data/train.csv"));
    assert!(!header
        .iter()
        .any(|h| h == "ScanDir ID" || h == "Secondary Dx" || h == "DX"));
    assert_eq!(header.len(), 2 + 20);

    let (header, _) = {
        let out2 = dir.path().join("run2");
        assert!(tabx(&["prep", "--out", s(&out2)]).status.success());
        csv_rows(&out2.join("data/train.csv"))
    };
    assert!(header.iter().any(|h| h == "ScanDir ID") && header.iter().any(|h| h == "Secondary Dx"));
}

#[test]
fn existing_non_run_directory_is_not_replaced() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("precious");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("notes.txt"), "keep me").unwrap();
    let o = tabx(&["pipeline", "--models", "DT", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        fs::read_to_string(out.join("notes.txt")).unwrap(),
        "keep me"
    );
}

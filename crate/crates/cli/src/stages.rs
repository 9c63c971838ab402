//! Pipeline stages. Each stage reads what the earlier ones wrote into the
//! run directory, so the stages can also be run one verb at a time.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use tabx_core::data::{
    adhd200_schema, encode_categoricals, impute_mean, load_csv, make_labels, merge_tables, split,
    standardize, synth_generate, CsvOptions, DataTable, FeatureMatrix, LabelVector,
    PreprocessState, SUBJECT_COLUMN,
};
use tabx_core::eval::{evaluate, EvalReport, COMPARISON_HEADER};
use tabx_core::explain::{
    kernel_shap, mean_abs_shap, pfi, GlobalImportance, PfiReport, ShapExplanation,
};
use tabx_core::nn::TrainingHistory;
use tabx_core::rng;
use tabx_core::select::{correlation_matrix, prune_redundant, CorrelationMatrix, PruneReport};
use tabx_core::zoo::{FittedModel, ModelKind};
use tabx_core::Matrix;

use crate::config::{DataSource, RunConfig};
use crate::error::{CliError, Result};
use crate::rundir::{csv_text, parse_csv, RunDir};

pub const RAW_CSV: &str = "data/raw.csv";
pub const LABELS_CSV: &str = "data/labels.csv";
pub const STATE_JSON: &str = "data/preprocess_state.json";
pub const SPLIT_JSON: &str = "data/split.json";
pub const TRAIN_CSV: &str = "data/train.csv";
pub const TEST_CSV: &str = "data/test.csv";
pub const CORRELATION_JSON: &str = "selection/correlation.json";
pub const PRUNE_JSON: &str = "selection/prune.json";
pub const PREDICTIONS_CSV: &str = "eval/predictions.csv";
pub const CONSENSUS_JSON: &str = "eval/consensus.json";
pub const COMPARISON_CSV: &str = "eval/comparison.csv";
pub const BACKGROUND_JSON: &str = "explain/background.json";

// Seed streams, so that each randomized step draws independently of the others.
const STREAM_SYNTH: u64 = 1;
const STREAM_TRAIN: u64 = 2;
const STREAM_BACKGROUND: u64 = 3;
const STREAM_PFI: u64 = 4;
const STREAM_SHAP: u64 = 5;

fn kind_index(kind: ModelKind) -> u64 {
    ModelKind::ALL
        .iter()
        .position(|&k| k == kind)
        .expect("kind is listed") as u64
}

fn seed_for(master: u64, stream: u64, index: u64) -> u64 {
    rng::derive_seed(rng::derive_seed(master, stream), index)
}

/// Seed of the synthetic table for a run seed; `tabx synth` uses it too,
/// so a written synthetic CSV reproduces the in-memory source exactly.
pub fn synth_seed(seed: u64) -> u64 {
    rng::derive_seed(seed, STREAM_SYNTH)
}

pub fn model_seed(seed: u64, kind: ModelKind) -> u64 {
    seed_for(seed, STREAM_TRAIN, kind_index(kind))
}

pub fn model_path(kind: ModelKind) -> String {
    format!("models/{kind}.json")
}

pub fn history_path(kind: ModelKind) -> String {
    format!("models/{kind}_history.json")
}

pub fn eval_path(kind: ModelKind) -> String {
    format!("eval/{kind}.json")
}

pub fn explain_path(kind: ModelKind, file: &str) -> String {
    format!("explain/{kind}/{file}")
}

// ---------------------------------------------------------------- data

/// Raw input table, before any cleaning.
pub fn load_source(config: &RunConfig) -> Result<DataTable> {
    match config.source() {
        DataSource::Synth => Ok(synth_generate(config.synth_counts, synth_seed(config.seed)).0),
        DataSource::Csv(paths) => {
            let schema = adhd200_schema();
            let parts = paths
                .iter()
                .map(|p| load_csv(p, &schema, &CsvOptions::default()))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(merge_tables(&parts)?)
        }
    }
}

/// Subject identifiers taken from the raw id column. A missing id falls
/// back to the row number and repeated ids get a row suffix.
pub fn subject_ids(table: &DataTable) -> Vec<String> {
    let col = table.column(SUBJECT_COLUMN);
    let mut seen = std::collections::BTreeSet::new();
    (0..table.n_rows())
        .map(|r| {
            let id = match col.and_then(|c| c.numeric_at(r)) {
                Some(v) => format!("{v}"),
                None => format!("row{r}"),
            };
            if seen.insert(id.clone()) {
                id
            } else {
                format!("{id}-{r}")
            }
        })
        .collect()
}

/// One side of the split: subject ids, labels and features.
#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub subjects: Vec<String>,
    pub labels: Vec<usize>,
    pub features: FeatureMatrix,
}

impl Part {
    pub fn x(&self) -> &Matrix {
        self.features.data()
    }

    pub fn names(&self) -> &[String] {
        self.features.names()
    }

    pub fn select(&self, keep: &[String]) -> Result<Part> {
        Ok(Part {
            subjects: self.subjects.clone(),
            labels: self.labels.clone(),
            features: self.features.select(keep)?,
        })
    }

    pub fn to_csv(&self) -> String {
        let header: Vec<&str> = ["subject", "label"]
            .into_iter()
            .chain(self.names().iter().map(String::as_str))
            .collect();
        let rows = (0..self.subjects.len()).map(|r| {
            let mut row = vec![self.subjects[r].clone(), self.labels[r].to_string()];
            row.extend(self.x().row(r).iter().map(|v| format!("{v}")));
            row
        });
        csv_text(&header, rows)
    }

    pub fn from_csv(text: &str) -> Result<Part> {
        let (header, rows) = parse_csv(text)?;
        if header.len() < 2 || header[0] != "subject" || header[1] != "label" {
            return Err(CliError::MissingData(
                "feature table must start with subject,label".into(),
            ));
        }
        let names: Vec<String> = header[2..].to_vec();
        let bad = |what: &str, v: &str| {
            CliError::MissingData(format!("bad {what} '{v}' in feature table"))
        };
        let mut subjects = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * names.len());
        for row in rows {
            subjects.push(row[0].clone());
            labels.push(row[1].parse().map_err(|_| bad("label", &row[1]))?);
            for v in &row[2..] {
                data.push(v.parse::<f64>().map_err(|_| bad("value", v))?);
            }
        }
        let x = Matrix::from_vec(subjects.len(), names.len(), data);
        Ok(Part {
            subjects,
            labels,
            features: FeatureMatrix::new(names, x)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub train_frac: f64,
    pub seed: u64,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub labels: LabelVector,
    pub train: Part,
    pub test: Part,
}

/// Load → impute → encode → label → split → scale. Labels come from the
/// raw DX column, before imputation touches it.
pub fn prepare(
    config: &RunConfig,
    raw: &DataTable,
) -> Result<(Prepared, PreprocessState, SplitRecord)> {
    for name in &config.excluded_features {
        if raw.schema().index_of(name).is_none() {
            return Err(CliError::Config(format!(
                "cannot exclude unknown feature '{name}'"
            )));
        }
    }
    let labels = make_labels(raw, config.task)?;
    let subjects = subject_ids(raw);
    let (imputed, mut state) = impute_mean(raw)?;
    let encoded = encode_categoricals(&imputed, &mut state)?;
    let features = encoded.to_feature_matrix(&config.excluded_features)?;
    let parts = split(&features, &labels, config.train_frac(), config.seed)?;
    let scaled = standardize(&parts.train.0, &[&parts.test.0], &mut state)?;
    let [train_x, test_x]: [FeatureMatrix; 2] = scaled.try_into().expect("train and test");
    let take = |idx: &[usize]| idx.iter().map(|&i| subjects[i].clone()).collect::<Vec<_>>();
    let prepared = Prepared {
        train: Part {
            subjects: take(&parts.indices.train),
            labels: parts.train.1.values.clone(),
            features: train_x,
        },
        test: Part {
            subjects: take(&parts.indices.test),
            labels: parts.test.1.values.clone(),
            features: test_x,
        },
        labels,
    };
    let record = SplitRecord {
        train_frac: config.train_frac(),
        seed: config.seed,
        train_rows: parts.indices.train,
        test_rows: parts.indices.test,
    };
    Ok((prepared, state, record))
}

pub fn stage_prep(run: &RunDir, config: &RunConfig) -> Result<Prepared> {
    let raw = load_source(config)?;
    let (prepared, state, record) = prepare(config, &raw)?;
    run.write_config(config)?;
    let mut raw_csv = Vec::new();
    raw.write_csv(&mut raw_csv)?;
    run.write_text(
        RAW_CSV,
        &String::from_utf8(raw_csv).expect("csv output is utf-8"),
    )?;
    let subjects = subject_ids(&raw);
    let label_rows = subjects
        .iter()
        .zip(&prepared.labels.values)
        .map(|(s, l)| vec![s.clone(), l.to_string()]);
    run.write_text(LABELS_CSV, &csv_text(&["subject", "label"], label_rows))?;
    run.write_json(STATE_JSON, &state)?;
    run.write_json(SPLIT_JSON, &record)?;
    run.write_text(TRAIN_CSV, &prepared.train.to_csv())?;
    run.write_text(TEST_CSV, &prepared.test.to_csv())?;
    Ok(prepared)
}

pub fn read_part(run: &RunDir, rel: &str) -> Result<Part> {
    Part::from_csv(&run.read_text(rel)?)
}

// ---------------------------------------------------------------- selection

/// Correlations are fitted on the training split only.
pub fn stage_select(run: &RunDir, config: &RunConfig) -> Result<PruneReport> {
    let train = read_part(run, TRAIN_CSV)?;
    let corr = correlation_matrix(&train.features)?;
    let report = prune_redundant(&corr, config.correlation_threshold)?;
    run.write_json(CORRELATION_JSON, &corr)?;
    run.write_json(PRUNE_JSON, &report)?;
    Ok(report)
}

pub fn read_correlation(run: &RunDir) -> Result<CorrelationMatrix> {
    run.read_json(CORRELATION_JSON)
}

pub fn kept_features(run: &RunDir) -> Result<Vec<String>> {
    Ok(run.read_json::<PruneReport>(PRUNE_JSON)?.kept)
}

/// Train and test parts restricted to the features that survived pruning.
pub fn selected_parts(run: &RunDir) -> Result<(Part, Part)> {
    let kept = kept_features(run)?;
    Ok((
        read_part(run, TRAIN_CSV)?.select(&kept)?,
        read_part(run, TEST_CSV)?.select(&kept)?,
    ))
}

// ---------------------------------------------------------------- training

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub seed: u64,
    #[serde(flatten)]
    pub model: FittedModel,
}

pub fn stage_train(run: &RunDir, config: &RunConfig, log: &dyn Fn(&str)) -> Result<Vec<ModelKind>> {
    let (train, _) = selected_parts(run)?;
    let settings = config.zoo_settings();
    let k = config.task.n_classes();
    for &kind in &config.models {
        log(&format!("training {kind}"));
        let seed = model_seed(config.seed, kind);
        let (model, history) = FittedModel::train(
            kind,
            train.x(),
            &train.labels,
            k,
            train.names(),
            &settings,
            seed,
        )?;
        run.write_json(&model_path(kind), &ModelRecord { seed, model })?;
        if let Some(h) = history {
            run.write_json(&history_path(kind), &h)?;
        }
    }
    Ok(config.models.clone())
}

pub fn load_model(run: &RunDir, kind: ModelKind) -> Result<FittedModel> {
    let text = run.read_text(&model_path(kind))?;
    // Re-serialize the body so the model's own validation runs on load.
    let record: ModelRecord = serde_json::from_str::<crate::rundir::Envelope<ModelRecord>>(&text)
        .map_err(|e| CliError::Json {
            path: run.path(&model_path(kind)),
            source: e,
        })?
        .body;
    Ok(FittedModel::from_json(&record.model.to_json())?)
}

pub fn load_history(run: &RunDir, kind: ModelKind) -> Result<TrainingHistory> {
    run.read_json(&history_path(kind))
}

// ---------------------------------------------------------------- evaluation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEval {
    pub model: ModelKind,
    pub n_test: usize,
    #[serde(flatten)]
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPrediction {
    pub model: ModelKind,
    pub predicted: usize,
    pub proba: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectConsensus {
    pub subject: String,
    /// Row of the subject in the test part.
    pub row: usize,
    pub true_label: usize,
    pub predictions: Vec<ModelPrediction>,
    pub votes: Vec<usize>,
    pub mean_proba: Vec<f64>,
    pub consensus: usize,
    /// Consensus is an ADHD class.
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusTable {
    pub class_names: Vec<String>,
    pub models: Vec<ModelKind>,
    pub subjects: Vec<SubjectConsensus>,
}

impl ConsensusTable {
    pub fn find(&self, subject: &str) -> Result<&SubjectConsensus> {
        self.subjects
            .iter()
            .find(|s| s.subject == subject)
            .ok_or_else(|| CliError::UnknownSubject(subject.to_string()))
    }
}

/// Majority vote over each model's argmax. Ties between the most-voted
/// classes go to the one with the highest mean probability, then to the
/// lowest class index. Returns (class, votes, mean probabilities).
pub fn consensus(probas: &[&[f64]]) -> (usize, Vec<usize>, Vec<f64>) {
    assert!(!probas.is_empty(), "consensus needs at least one model");
    let k = probas[0].len();
    let mut votes = vec![0usize; k];
    let mut mean = vec![0.0; k];
    for p in probas {
        votes[argmax(p)] += 1;
        for (m, v) in mean.iter_mut().zip(p.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= probas.len() as f64);
    let top = *votes.iter().max().expect("k > 0");
    let mut best = None::<usize>;
    for c in (0..k).filter(|&c| votes[c] == top) {
        if best.is_none_or(|b| mean[c] > mean[b]) {
            best = Some(c);
        }
    }
    (best.expect("some class has the top vote"), votes, mean)
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

pub fn stage_eval(run: &RunDir, config: &RunConfig) -> Result<Vec<ModelEval>> {
    let (_, test) = selected_parts(run)?;
    let k = config.task.n_classes();
    let mut evals = Vec::new();
    let mut probas = Vec::new();
    for &kind in &config.models {
        let model = load_model(run, kind)?;
        let proba = model.predict_proba(test.x())?;
        let report = evaluate(&test.labels, &proba)?;
        let entry = ModelEval {
            model: kind,
            n_test: test.labels.len(),
            report,
        };
        run.write_json(&eval_path(kind), &entry)?;
        evals.push(entry);
        probas.push(proba);
    }

    let mut header = vec![
        "subject".to_string(),
        "true_label".into(),
        "model".into(),
        "predicted".into(),
    ];
    header.extend((0..k).map(|c| format!("p{c}")));
    let mut rows = Vec::new();
    let mut subjects = Vec::new();
    for (r, subject) in test.subjects.iter().enumerate() {
        let rows_r: Vec<&[f64]> = probas.iter().map(|p| p.row(r)).collect();
        let predictions: Vec<ModelPrediction> = config
            .models
            .iter()
            .zip(&rows_r)
            .map(|(&model, p)| ModelPrediction {
                model,
                predicted: argmax(p),
                proba: p.to_vec(),
            })
            .collect();
        for p in &predictions {
            let mut row = vec![
                subject.clone(),
                test.labels[r].to_string(),
                p.model.to_string(),
                p.predicted.to_string(),
            ];
            row.extend(p.proba.iter().map(|v| format!("{v}")));
            rows.push(row);
        }
        let (class, votes, mean_proba) = consensus(&rows_r);
        subjects.push(SubjectConsensus {
            subject: subject.clone(),
            row: r,
            true_label: test.labels[r],
            predictions,
            votes,
            mean_proba,
            consensus: class,
            positive: class != 0,
        });
    }
    run.write_text(PREDICTIONS_CSV, &csv_text(&header, rows))?;
    let table = ConsensusTable {
        class_names: config.task.class_names(),
        models: config.models.clone(),
        subjects,
    };
    run.write_json(CONSENSUS_JSON, &table)?;

    let mut comparison = String::from(COMPARISON_HEADER);
    comparison.push('\n');
    for e in &evals {
        comparison.push_str(&e.report.csv_row(e.model.name()));
        comparison.push('\n');
    }
    run.write_text(COMPARISON_CSV, &comparison)?;
    Ok(evals)
}

pub fn read_eval(run: &RunDir, kind: ModelKind) -> Result<ModelEval> {
    run.read_json(&eval_path(kind))
}

pub fn read_consensus(run: &RunDir) -> Result<ConsensusTable> {
    run.read_json(CONSENSUS_JSON)
}

// ---------------------------------------------------------------- explanation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    /// Rows of the training part used as the SHAP reference set.
    pub train_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectShap {
    pub subject: String,
    #[serde(flatten)]
    pub explanation: ShapExplanation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalShap {
    pub model: ModelKind,
    pub shap_samples: usize,
    pub background_size: usize,
    pub subjects: Vec<SubjectShap>,
}

impl LocalShap {
    pub fn find(&self, subject: &str) -> Option<&ShapExplanation> {
        self.subjects
            .iter()
            .find(|s| s.subject == subject)
            .map(|s| &s.explanation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalShap {
    pub model: ModelKind,
    pub n_explained: usize,
    pub features: Vec<GlobalImportance>,
}

pub const PFI_JSON: &str = "pfi.json";
pub const PFI_CSV: &str = "pfi.csv";
pub const SHAP_LOCAL_JSON: &str = "shap_local.json";
pub const SHAP_GLOBAL_JSON: &str = "shap_global.json";
pub const BEESWARM_CSV: &str = "beeswarm.csv";

pub fn background_rows(n_train: usize, size: usize, seed: u64) -> Vec<usize> {
    let mut rows = sample(
        &mut rng::substream(seed, STREAM_BACKGROUND),
        n_train,
        size.min(n_train),
    )
    .into_vec();
    rows.sort_unstable();
    rows
}

/// Global PFI on the test part for every explained model, plus local
/// Kernel SHAP for each test subject with a positive consensus. The
/// explained class is the consensus class.
pub fn stage_explain(run: &RunDir, config: &RunConfig, log: &dyn Fn(&str)) -> Result<()> {
    let (train, test) = selected_parts(run)?;
    let table = read_consensus(run)?;
    let rows = background_rows(train.labels.len(), config.background_size, config.seed);
    let background = train.x().select_rows(&rows);
    run.write_json(BACKGROUND_JSON, &Background { train_rows: rows })?;
    let positive: Vec<&SubjectConsensus> = table.subjects.iter().filter(|s| s.positive).collect();
    let names = test.names();

    for kind in config.explained() {
        log(&format!("explaining {kind}"));
        let model = load_model(run, kind)?;
        let idx = kind_index(kind);
        let report = pfi(
            &model,
            test.x(),
            &test.labels,
            names,
            &config.pfi_metric.to_string(),
            config.pfi_repeats,
            seed_for(config.seed, STREAM_PFI, idx),
        )?;
        let report = PfiReport {
            features: report.ranked().into_iter().cloned().collect(),
            ..report
        };
        run.write_json(&explain_path(kind, PFI_JSON), &report)?;
        run.write_text(&explain_path(kind, PFI_CSV), &report.to_csv())?;

        let shap_seed = seed_for(config.seed, STREAM_SHAP, idx);
        let mut locals = Vec::with_capacity(positive.len());
        for s in &positive {
            let x = test.x().row(s.row);
            let e = kernel_shap(
                &model,
                x,
                &background,
                names,
                config.shap_samples,
                rng::derive_seed(shap_seed, s.row as u64),
                s.consensus,
            )?;
            locals.push(SubjectShap {
                subject: s.subject.clone(),
                explanation: e,
            });
        }
        let explanations: Vec<ShapExplanation> =
            locals.iter().map(|s| s.explanation.clone()).collect();
        let global = if explanations.is_empty() {
            Vec::new()
        } else {
            mean_abs_shap(&explanations)?
        };
        let beeswarm = locals.iter().flat_map(|s| {
            s.explanation.features.iter().map(|a| {
                vec![
                    a.name.clone(),
                    s.subject.clone(),
                    format!("{}", a.phi),
                    format!("{}", a.value),
                ]
            })
        });
        run.write_text(
            &explain_path(kind, BEESWARM_CSV),
            &csv_text(&["feature", "subject", "phi", "value"], beeswarm),
        )?;
        run.write_json(
            &explain_path(kind, SHAP_GLOBAL_JSON),
            &GlobalShap {
                model: kind,
                n_explained: locals.len(),
                features: global,
            },
        )?;
        run.write_json(
            &explain_path(kind, SHAP_LOCAL_JSON),
            &LocalShap {
                model: kind,
                shap_samples: config.shap_samples,
                background_size: background.rows(),
                subjects: locals,
            },
        )?;
    }
    Ok(())
}

pub fn read_pfi(run: &RunDir, kind: ModelKind) -> Result<PfiReport> {
    run.read_json(&explain_path(kind, PFI_JSON))
}

pub fn read_local_shap(run: &RunDir, kind: ModelKind) -> Result<LocalShap> {
    run.read_json(&explain_path(kind, SHAP_LOCAL_JSON))
}

pub fn read_global_shap(run: &RunDir, kind: ModelKind) -> Result<GlobalShap> {
    run.read_json(&explain_path(kind, SHAP_GLOBAL_JSON))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_wins() {
        let a = [0.9, 0.1];
        let b = [0.2, 0.8];
        let (c, votes, _) = consensus(&[&a, &a, &b]);
        assert_eq!((c, votes), (0, vec![2, 1]));
    }

    #[test]
    fn tie_goes_to_higher_mean_probability() {
        // 4 vs 4 votes; the class-1 voters are more confident.
        let zero = [0.55, 0.45];
        let one = [0.05, 0.95];
        let probas: Vec<&[f64]> = vec![&zero, &zero, &zero, &zero, &one, &one, &one, &one];
        let (c, votes, mean) = consensus(&probas);
        assert_eq!(votes, vec![4, 4]);
        assert!((mean[1] - 0.7).abs() < 1e-12);
        assert_eq!(c, 1);
    }

    #[test]
    fn full_tie_goes_to_lowest_class() {
        let a = [0.6, 0.4];
        let b = [0.4, 0.6];
        assert_eq!(consensus(&[&a, &b]).0, 0);
    }

    #[test]
    fn part_csv_round_trip_is_exact() {
        let x = Matrix::from_rows(&[vec![0.1, -1.0 / 3.0], vec![1e-300, 2.5]]);
        let part = Part {
            subjects: vec!["7".into(), "9".into()],
            labels: vec![1, 0],
            features: FeatureMatrix::new(vec!["a".into(), "b, c".into()], x).unwrap(),
        };
        assert_eq!(Part::from_csv(&part.to_csv()).unwrap(), part);
    }

    #[test]
    fn background_rows_sorted_and_bounded() {
        let rows = background_rows(30, 50, 1);
        assert_eq!(rows, (0..30).collect::<Vec<_>>());
        let rows = background_rows(300, 10, 1);
        assert_eq!(rows.len(), 10);
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(rows, background_rows(300, 10, 1));
    }
}

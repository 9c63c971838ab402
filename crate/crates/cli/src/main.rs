use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use tabx::config::{parse_models, RunConfig};
use tabx::manifest;
use tabx::plot::{self, PlotKind};
use tabx::rundir::RunDir;
use tabx::{compare, report, stages, CliError};
use tabx_core::data::{synth_generate, Task};

#[derive(Parser)]
#[command(
    name = "tabx",
    version,
    about = "Explainable ADHD classification pipeline on phenotypic tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// binary or multiclass.
    #[arg(long, global = true)]
    task: Option<Task>,
    /// `synth` or comma-separated CSV paths.
    #[arg(long, global = true)]
    data: Option<String>,
    /// Run directory (or output file for `synth`).
    #[arg(long, global = true, default_value = "run")]
    out: PathBuf,
    /// Comma-separated model kinds, or `all`.
    #[arg(long, global = true)]
    models: Option<String>,
    /// Comma-separated feature columns to leave out.
    #[arg(long, global = true, value_delimiter = ',')]
    exclude_features: Option<Vec<String>>,
    /// Absolute correlation above which a later feature is pruned.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Comma-separated model kinds to explain (default: all trained).
    #[arg(long, global = true)]
    explain_models: Option<String>,
    /// Suppress progress messages.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Load, clean, encode, label, split and scale the data.
    Prep,
    /// Prune correlated features.
    Select,
    /// Train the selected models.
    Train,
    /// Evaluate on the test split and form consensus predictions.
    Eval,
    /// Permutation importance and SHAP attributions.
    Explain,
    /// Diagnosis reports (one subject, or every test subject).
    Report {
        #[arg(long)]
        subject: Option<String>,
    },
    /// Multiclass comparison with published accuracies.
    Compare,
    /// Render plots of one kind, or `all`.
    Plot {
        #[arg(long, default_value = "all")]
        kind: String,
    },
    /// Write a synthetic table as CSV to --out.
    Synth {
        /// Rows per class, e.g. 291,116,5,61.
        #[arg(long)]
        counts: Option<String>,
    },
    /// Every stage, into a fresh run directory.
    Pipeline,
}

impl Global {
    fn apply(&self, mut c: RunConfig) -> Result<RunConfig, CliError> {
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(task) = self.task {
            if task != c.task {
                c.train_frac = None;
            }
            c.task = task;
        }
        if let Some(data) = &self.data {
            c.data = data.clone();
        }
        if let Some(models) = &self.models {
            c.models = parse_models(models)?;
        }
        if let Some(list) = &self.exclude_features {
            c.excluded_features = list
                .iter()
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
        }
        if let Some(t) = self.threshold {
            c.correlation_threshold = t;
        }
        if let Some(models) = &self.explain_models {
            c.explain_models = Some(parse_models(models)?);
        }
        Ok(c)
    }

    /// Config for a fresh run: the file (or defaults) plus flags.
    fn fresh_config(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let c = self.apply(base)?;
        c.validate()?;
        Ok(c.resolved())
    }

    /// Config of an existing run plus flags; the stored copy is updated
    /// when the flags change it.
    fn existing_run(&self) -> Result<(RunDir, RunConfig), CliError> {
        let (_, stored) = RunDir::open(&self.out)?;
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => stored.clone(),
        };
        let c = self.apply(base)?;
        c.validate()?;
        let c = c.resolved();
        let run = RunDir::new(&self.out, &c);
        if c != stored {
            run.write_config(&c)?;
        }
        Ok((run, c))
    }
}

fn parse_counts(s: &str) -> Result<[usize; 4], CliError> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad class count '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|_| CliError::Config("expected four class counts".into()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    let quiet = g.quiet;
    let log = move |msg: &str| {
        if !quiet {
            eprintln!("[tabx] {msg}");
        }
    };
    match &cli.command {
        Command::Pipeline => {
            let config = g.fresh_config()?;
            let m = tabx::run_pipeline(&config, &g.out, &log)?;
            println!(
                "run written to {} ({} artifacts)",
                g.out.display(),
                m.artifacts.len()
            );
            print_comparison(&g.out)?;
        }
        Command::Synth { counts } => {
            let mut config = g.fresh_config()?;
            if let Some(c) = counts {
                config.synth_counts = parse_counts(c)?;
            }
            let (table, _) = synth_generate(config.synth_counts, stages::synth_seed(config.seed));
            write_synth(&table, &g.out)?;
            println!("{} rows written to {}", table.n_rows(), g.out.display());
        }
        Command::Prep => {
            let config = g.fresh_config()?;
            let run = RunDir::new(&g.out, &config);
            let p = stages::stage_prep(&run, &config)?;
            manifest::write(&run, &config)?;
            println!(
                "{} subjects, {} train / {} test, {} features",
                p.labels.len(),
                p.train.labels.len(),
                p.test.labels.len(),
                p.train.features.n_features()
            );
        }
        Command::Select => {
            let (run, config) = g.existing_run()?;
            let r = stages::stage_select(&run, &config)?;
            manifest::write(&run, &config)?;
            println!(
                "kept {} features; dropped {}",
                r.kept.len(),
                r.dropped.len()
            );
            for d in &r.dropped {
                println!("  {} (|r| = {:.4} with {})", d.name, d.abs_r, d.partner);
            }
        }
        Command::Train => {
            let (run, config) = g.existing_run()?;
            let kinds = stages::stage_train(&run, &config, &log)?;
            manifest::write(&run, &config)?;
            println!("trained {} models", kinds.len());
        }
        Command::Eval => {
            let (run, config) = g.existing_run()?;
            stages::stage_eval(&run, &config)?;
            manifest::write(&run, &config)?;
            print_comparison(&g.out)?;
        }
        Command::Explain => {
            let (run, config) = g.existing_run()?;
            stages::stage_explain(&run, &config, &log)?;
            manifest::write(&run, &config)?;
            println!("explained {} models", config.explained().len());
        }
        Command::Report { subject } => {
            let (run, config) = g.existing_run()?;
            match subject {
                Some(s) => {
                    let r = report::write_report(&run, &config, s)?;
                    print!("{}", r.render_text());
                }
                None => {
                    let reports = report::stage_reports(&run, &config)?;
                    let explained = reports.iter().filter(|r| r.explanation.is_some()).count();
                    println!(
                        "{} reports written, {explained} with explanations",
                        reports.len()
                    );
                }
            }
            manifest::write(&run, &config)?;
        }
        Command::Compare => {
            let (run, config) = g.existing_run()?;
            let table = compare::stage_compare(&run, &config)?;
            manifest::write(&run, &config)?;
            print!("{}", table.to_csv());
        }
        Command::Plot { kind } => {
            let (run, config) = g.existing_run()?;
            let n = if kind == "all" {
                plot::stage_plots(&run, &config)?
            } else {
                let plots = plot::collect(&run, &config, kind.parse::<PlotKind>()?)?;
                plot::write(&run, &plots)?;
                plots.len()
            };
            manifest::write(&run, &config)?;
            println!("{n} plots written to {}", run.path("plots").display());
        }
    }
    Ok(())
}

fn write_synth(table: &tabx_core::data::DataTable, out: &Path) -> anyhow::Result<()> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    let file = std::fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    table.write_csv(file).map_err(CliError::from)?;
    Ok(())
}

fn print_comparison(out: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(out.join(stages::COMPARISON_CSV))
        .with_context(|| format!("reading {}", stages::COMPARISON_CSV))?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

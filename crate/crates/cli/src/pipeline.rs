//! The full run: every stage into a staging directory that replaces the
//! output directory only when all stages succeed.

use std::fs;
use std::path::Path;

use tabx_core::data::Task;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::manifest::{self, Manifest, MANIFEST_FILE};
use crate::rundir::{RunDir, CONFIG_FILE};
use crate::{compare, plot, report, stages};

/// Runs every stage in order on `run`, then writes the manifest.
pub fn run_stages(run: &RunDir, config: &RunConfig, log: &dyn Fn(&str)) -> Result<Manifest> {
    log("preparing data");
    stages::stage_prep(run, config)?;
    log("pruning correlated features");
    let pruned = stages::stage_select(run, config)?;
    log(&format!(
        "{} features kept, {} dropped",
        pruned.kept.len(),
        pruned.dropped.len()
    ));
    stages::stage_train(run, config, log)?;
    log("evaluating");
    stages::stage_eval(run, config)?;
    stages::stage_explain(run, config, log)?;
    log("writing reports");
    report::stage_reports(run, config)?;
    if config.task == Task::Multiclass {
        compare::stage_compare(run, config)?;
    }
    log("plotting");
    plot::stage_plots(run, config)?;
    manifest::write(run, config)
}

/// Validates `config`, runs the pipeline in a sibling staging directory
/// and moves the result to `out`. A failed run leaves `out` untouched.
/// An existing `out` is replaced only if it holds a previous run.
pub fn run_pipeline(config: &RunConfig, out: &Path, log: &dyn Fn(&str)) -> Result<Manifest> {
    config.validate()?;
    let config = config.clone().resolved();
    if out.exists() {
        let is_run = out.join(CONFIG_FILE).is_file() || out.join(MANIFEST_FILE).is_file();
        let empty = out.is_dir()
            && fs::read_dir(out)
                .map_err(|e| CliError::io(out, e))?
                .next()
                .is_none();
        if !(out.is_dir() && (is_run || empty)) {
            return Err(CliError::Config(format!(
                "{} exists and is not a previous run directory",
                out.display()
            )));
        }
    }
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => Path::new(".").to_path_buf(),
    };
    fs::create_dir_all(&parent).map_err(|e| CliError::io(&parent, e))?;
    let staging = tempfile::Builder::new()
        .prefix(".tabx-staging-")
        .tempdir_in(&parent)
        .map_err(|e| CliError::io(&parent, e))?;
    run_stages(&RunDir::new(staging.path(), &config), &config, log)?;

    if out.exists() {
        fs::remove_dir_all(out).map_err(|e| CliError::io(out, e))?;
    }
    let staged = staging.keep();
    fs::rename(&staged, out).map_err(|e| CliError::io(out, e))?;
    manifest::verify(out)
}

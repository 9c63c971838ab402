//! Checksummed listing of every artifact in a run directory.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::rundir::{RunDir, SCHEMA_VERSION};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub seed: u64,
    pub task: String,
    pub artifacts: Vec<ArtifactEntry>,
}

fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

/// Relative paths (with `/` separators) of every file under `root`
/// except the manifest itself, sorted.
fn list_files(root: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))? {
            let path = entry.map_err(|e| CliError::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path.strip_prefix(root).expect("walk stays under root");
            let rel = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            if rel != MANIFEST_FILE {
                out.push(rel);
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn build(run: &RunDir, config: &RunConfig) -> Result<Manifest> {
    let artifacts = list_files(run.root())?
        .into_iter()
        .map(|rel| {
            let (sha256, bytes) = sha256_file(&run.path(&rel))?;
            Ok(ArtifactEntry {
                path: rel,
                sha256,
                bytes,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: tabx_core::VERSION.to_string(),
        seed: config.seed,
        task: config.task.to_string(),
        artifacts,
    })
}

/// Rebuilds and writes the manifest, then re-reads it and checks every
/// checksum.
pub fn write(run: &RunDir, config: &RunConfig) -> Result<Manifest> {
    let manifest = build(run, config)?;
    run.write_json(MANIFEST_FILE, &manifest)?;
    verify(run.root())?;
    Ok(manifest)
}

/// Checks the stored manifest against the files on disk. Modified,
/// missing and unlisted files are all reported.
pub fn verify(root: &Path) -> Result<Manifest> {
    let (run, _) = RunDir::open(root)?;
    let manifest: Manifest = run.read_json(MANIFEST_FILE)?;
    let stored: crate::rundir::Envelope<serde_json::Value> =
        serde_json::from_str(&run.read_text(MANIFEST_FILE)?).map_err(|e| CliError::Json {
            path: run.path(MANIFEST_FILE),
            source: e,
        })?;
    let mut problems = Vec::new();
    if stored.schema_version != SCHEMA_VERSION {
        problems.push(format!("schema version {}", stored.schema_version));
    }
    if stored.config_hash != run.config_hash() {
        problems.push("config.json does not match the recorded config hash".to_string());
    }
    for entry in &manifest.artifacts {
        let path = run.path(&entry.path);
        if !path.is_file() {
            problems.push(format!("{} is missing", entry.path));
            continue;
        }
        let (sha, bytes) = sha256_file(&path)?;
        if sha != entry.sha256 || bytes != entry.bytes {
            problems.push(format!("{} has been modified", entry.path));
        }
    }
    for rel in list_files(root)? {
        if !manifest.artifacts.iter().any(|e| e.path == rel) {
            problems.push(format!("{rel} is not listed"));
        }
    }
    if problems.is_empty() {
        Ok(manifest)
    } else {
        Err(CliError::Integrity(problems.join("; ")))
    }
}

//! Reading and writing artifacts inside a run directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Version of every JSON document this tool writes.
pub const SCHEMA_VERSION: u32 = 1;

pub const CONFIG_FILE: &str = "config.json";

/// Common header of every JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub config_hash: String,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
    config_hash: String,
}

impl RunDir {
    pub fn new(root: &Path, config: &RunConfig) -> Self {
        Self {
            root: root.to_path_buf(),
            config_hash: config.hash(),
        }
    }

    /// Opens an existing run and returns it with its stored config.
    pub fn open(root: &Path) -> Result<(Self, RunConfig)> {
        let path = root.join(CONFIG_FILE);
        if !path.is_file() {
            return Err(CliError::MissingData(format!(
                "{} is not a run directory (no {CONFIG_FILE})",
                root.display()
            )));
        }
        let config = RunConfig::load(&path)?;
        Ok((Self::new(root, &config), config))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn exists(&self, rel: &str) -> bool {
        self.path(rel).is_file()
    }

    pub fn write_config(&self, config: &RunConfig) -> Result<()> {
        self.write_text(CONFIG_FILE, &(config.to_json() + "\n"))
    }

    pub fn write_text(&self, rel: &str, text: &str) -> Result<()> {
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn read_text(&self, rel: &str) -> Result<String> {
        let path = self.path(rel);
        if !path.is_file() {
            return Err(CliError::MissingData(format!(
                "{} not found; run the earlier stages first",
                path.display()
            )));
        }
        fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, body: &T) -> Result<()> {
        let doc = Envelope {
            schema_version: SCHEMA_VERSION,
            config_hash: self.config_hash.clone(),
            body,
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Json {
            path: self.path(rel),
            source: e,
        })?;
        text.push('\n');
        self.write_text(rel, &text)
    }

    pub fn read_json<T: DeserializeOwned>(&self, rel: &str) -> Result<T> {
        let text = self.read_text(rel)?;
        let doc: Envelope<T> = serde_json::from_str(&text).map_err(|e| CliError::Json {
            path: self.path(rel),
            source: e,
        })?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(CliError::MissingData(format!(
                "{rel} has schema version {}, expected {SCHEMA_VERSION}",
                doc.schema_version
            )));
        }
        Ok(doc.body)
    }
}

/// Renders rows as CSV text with a header.
pub fn csv_text<S: AsRef<str>>(
    header: &[S],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header.iter().map(AsRef::as_ref))
        .expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Parses CSV text into (header, rows).
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let bad = |e: csv::Error| CliError::MissingData(format!("malformed CSV artifact: {e}"));
    let header = r
        .headers()
        .map_err(bad)?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(bad)?;
    Ok((header, rows))
}

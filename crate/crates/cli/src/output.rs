//! CSV tables, reports and the on-disk layout of a run directory.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Comma-separated text with a header row and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Ordered `key: value` lines written to report.txt.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub lines: Vec<(String, String)>,
}

impl Report {
    pub fn add(&mut self, key: impl Into<String>, value: impl Display) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }
}

/// Everything an experiment writes besides the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub samples: Table,
    pub plotdata: Vec<(String, Table)>,
    pub report: Report,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    /// The resolved configuration as config-file text; running it again
    /// reproduces samples.csv byte for byte.
    pub config_text: String,
    pub tool_version: String,
    pub git_describe: String,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub files: Vec<String>,
}

pub fn write_run(dir: &Path, output: &RunOutput, manifest: &mut Manifest) -> CliResult<()> {
    let plot_dir = dir.join("plotdata");
    fs::create_dir_all(&plot_dir).map_err(|e| CliError::io(format!("creating {}", plot_dir.display()), e))?;
    let mut files = vec!["samples.csv".to_string()];
    write_text(&dir.join("samples.csv"), &output.samples.to_csv())?;
    for (name, table) in &output.plotdata {
        let rel = format!("plotdata/{name}.csv");
        write_text(&dir.join(&rel), &table.to_csv())?;
        files.push(rel);
    }
    write_text(&dir.join("report.txt"), &output.report.render())?;
    files.push("report.txt".into());
    write_text(&dir.join("config.resolved"), &manifest.config_text)?;
    files.push("config.resolved".into());
    files.push("manifest.json".into());
    manifest.files = files;
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    write_text(&dir.join("manifest.json"), &(json + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

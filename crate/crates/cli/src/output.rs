//! CSV and JSON writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Rows of numbers under a header that records the producing job.
#[derive(Debug, Serialize)]
pub struct Table {
    #[serde(skip)]
    header: String,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: String, columns: &[&str]) -> Self {
        Self { header, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// `# <job JSON>`, the column names, then values to 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\n{}\n", self.header, self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.11e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Full-precision JSON; non-finite values become `null`.
    pub fn to_json(&self) -> String {
        let config: serde_json::Value = serde_json::from_str(&self.header).expect("header is JSON");
        let doc = serde_json::json!({ "config": config, "columns": self.columns, "rows": self.rows });
        serde_json::to_string(&doc).expect("table serializes") + "\n"
    }
}

/// `out.csv` becomes `out_snr100.csv` when several SNRs share one output path.
pub fn path_for_snr(path: &Path, snr: Option<f64>, several: bool) -> PathBuf {
    let (Some(snr), true) = (snr, several) else {
        return path.to_path_buf();
    };
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_snr{snr}.{}", ext.to_string_lossy()),
        None => format!("{stem}_snr{snr}"),
    };
    path.with_file_name(name)
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(format!("cannot write to stdout: {e}"))),
    }
}

pub fn write(table: &Table, format: Format, path: Option<&Path>) -> Result<(), Failure> {
    let text = match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    emit(&text, path)
}

//! CSV and JSON report writers.
//!
//! CSV reports open with `#` comment lines carrying the tool version, the
//! resolved config as one line of JSON and the floor-convention note, then a
//! fixed header row. Reals use 17 significant digits; absent values are
//! empty fields. JSON reports carry the same metadata next to a `data` field.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const TOOL: &str = "kneser-mix";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped whenever a column or field changes.
pub const SCHEMA_VERSION: u32 = 1;
pub const FLOOR_NOTE: &str = "bounds at a non-integer time t are evaluated at floor(t)";

const CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub schema: u32,
    pub config: RunConfig,
    pub floor_convention: String,
}

impl ReportHeader {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            schema: SCHEMA_VERSION,
            config: cfg.clone(),
            floor_convention: FLOOR_NOTE.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub data: T,
}

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// A complete CSV document.
pub fn csv_document(cfg: &RunConfig, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {TOOL} {VERSION} schema {SCHEMA_VERSION}\n"));
    out.push_str(CONFIG_PREFIX);
    out.push_str(&serde_json::to_string(cfg).expect("config serializes"));
    out.push('\n');
    out.push_str(&format!("# {FLOOR_NOTE}\n"));
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// A complete pretty-printed JSON document.
pub fn json_document<T: Serialize>(cfg: &RunConfig, data: T) -> String {
    let report = Report {
        header: ReportHeader::new(cfg),
        data,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

/// Config embedded in a CSV document's comment header.
pub fn csv_config(doc: &str) -> Result<RunConfig> {
    let line = doc
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
        .context("no config line in CSV header")?;
    Ok(serde_json::from_str(line)?)
}

/// Header of a JSON document.
pub fn json_header(doc: &str) -> Result<ReportHeader> {
    let report: Report<serde_json::Value> = serde_json::from_str(doc)?;
    Ok(report.header)
}

/// Data lines of a CSV document as field vectors, header row first.
pub fn csv_records(doc: &str) -> Vec<Vec<&str>> {
    doc.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').collect())
        .collect()
}

//! Report records, run configuration and the JSON/CSV writers.
//!
//! CSV reports have the fixed columns
//! `bound_id,dim,lambda,lhs,rhs,gap,satisfied` (landscape reports append `r`);
//! `lambda` is empty for bounds that do not depend on it. JSON reports carry the
//! same records together with the full [`RunConfig`] and command-specific details.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use fidelity_bounds::bounds::BoundReport;
use fidelity_bounds::search::{GapSample, LandscapeRow};
use fidelity_bounds::{BoundId, Ensemble, Tolerances};
use serde::{Deserialize, Serialize};

use crate::args::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Compute,
    Verify,
    Search,
    Landscape,
}

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
    pub bounds: Vec<BoundId>,
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<Ensemble>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    pub seed: u64,
    pub seed_randomized: bool,
    pub tolerances: Tolerances,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub bound_id: BoundId,
    pub dim: usize,
    pub lambda: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub satisfied: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

impl Record {
    pub fn from_report(report: &BoundReport<f64>, dim: usize) -> Self {
        Self {
            bound_id: report.bound_id,
            dim,
            lambda: report.lambda,
            lhs: report.lhs,
            rhs: report.rhs,
            gap: report.gap,
            satisfied: report.satisfied,
            r: None,
        }
    }
}

impl From<&GapSample> for Record {
    fn from(s: &GapSample) -> Self {
        Self {
            bound_id: s.bound_id,
            dim: s.dim,
            lambda: s.lambda,
            lhs: s.lhs,
            rhs: s.rhs,
            gap: s.gap,
            satisfied: s.satisfied,
            r: None,
        }
    }
}

impl From<&LandscapeRow> for Record {
    fn from(row: &LandscapeRow) -> Self {
        Self {
            bound_id: row.bound_id,
            dim: row.dim,
            lambda: row.lambda,
            lhs: row.lhs,
            rhs: row.rhs,
            gap: row.gap,
            satisfied: row.satisfied,
            r: Some(row.r),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub exit_status: i32,
    pub records: Vec<Record>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

pub const CSV_COLUMNS: [&str; 7] = [
    "bound_id",
    "dim",
    "lambda",
    "lhs",
    "rhs",
    "gap",
    "satisfied",
];

fn optional(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(records: &[Record], with_r: bool, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if with_r {
        header.push("r");
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.bound_id.to_string(),
            r.dim.to_string(),
            optional(r.lambda),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.gap.to_string(),
            r.satisfied.to_string(),
        ];
        if with_r {
            row.push(optional(r.r));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn render(report: &Report) -> io::Result<Vec<u8>> {
    match report.config.format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).map_err(io::Error::other)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut bytes = Vec::new();
            let with_r = report.config.command == CommandKind::Landscape;
            write_csv(&report.records, with_r, &mut bytes).map_err(io::Error::other)?;
            Ok(bytes)
        }
    }
}

/// Writes to `config.output`, or to standard output when unset.
pub fn emit(report: &Report) -> io::Result<()> {
    let bytes = render(report)?;
    match &report.config.output {
        Some(path) => write_file(path, &bytes),
        None => io::stdout().lock().write_all(&bytes),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    File::create(path)?.write_all(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_fixed_columns_and_blank_lambda() {
        let rec = Record {
            bound_id: BoundId::FvdgLower,
            dim: 2,
            lambda: None,
            lhs: 0.5,
            rhs: 0.25,
            gap: 0.25,
            satisfied: true,
            r: None,
        };
        let mut out = Vec::new();
        write_csv(&[rec], false, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "bound_id,dim,lambda,lhs,rhs,gap,satisfied\nfvdg_lower,2,,0.5,0.25,0.25,true\n"
        );
    }
}

//! CSV writers for runs, sweeps and verification reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! value reads back bit for bit.

use crate::discretization::GridSpec;
use crate::experiments::{Classification, RunRecord, SweepResult};
use crate::verification::{CheckReport, Comparison};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const TIMESERIES_HEADER: [&str; 7] = ["t", "avg_v1", "avg_v2", "sigma1", "sigma2", "c", "F"];
pub const SUMMARY_HEADER: [&str; 7] = [
    "final_growth_rate",
    "classification",
    "wall_time_s",
    "seed",
    "config_hash",
    "min_v1",
    "min_v2",
];
pub const SWEEP_HEADER: [&str; 4] = ["c_rho", "f", "growth_rate", "classification"];
pub const VERIFY_HEADER: [&str; 7] = [
    "name",
    "passed",
    "measured",
    "comparison",
    "tolerance",
    "seed",
    "details",
];

#[derive(Debug, Error)]
#[error("{path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: csv::Error,
}

/// Run-level facts that are not part of the [`RunRecord`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub classification: Classification,
    pub wall_time_s: f64,
    pub seed: u64,
    pub config_hash: String,
}

struct Sheet {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl Sheet {
    fn create(dir: &Path, name: &str, header: &[String]) -> Result<Self, OutputError> {
        let path = dir.join(name);
        let wrap = |source: csv::Error| OutputError {
            path: path.clone(),
            source,
        };
        if let Err(e) = fs::create_dir_all(dir) {
            return Err(wrap(e.into()));
        }
        let mut writer = csv::Writer::from_path(&path).map_err(wrap)?;
        writer.write_record(header).map_err(wrap)?;
        Ok(Self { path, writer })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<(), OutputError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|source| OutputError {
            path: self.path.clone(),
            source,
        })
    }

    fn finish(mut self) -> Result<PathBuf, OutputError> {
        self.writer.flush().map_err(|e| OutputError {
            path: self.path.clone(),
            source: e.into(),
        })?;
        Ok(self.path)
    }
}

fn owned(header: &[&str]) -> Vec<String> {
    header.iter().map(|s| s.to_string()).collect()
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// Writes `timeseries.csv`, `heatmap_v1.csv`, `heatmap_v2.csv` and
/// `summary.csv`; returns the paths written.
pub fn emit_run(
    record: &RunRecord,
    summary: &RunSummary,
    grid: &GridSpec,
    dir: &Path,
) -> Result<Vec<PathBuf>, OutputError> {
    let mut written = Vec::new();

    let mut ts = Sheet::create(dir, "timeseries.csv", &owned(&TIMESERIES_HEADER))?;
    for k in 0..record.len() {
        ts.row([
            record.times[k],
            record.avg_v1[k],
            record.avg_v2[k],
            record.sigma1[k],
            record.sigma2[k],
            record.c_value[k],
            record.f_tilde_value[k],
        ]
        .map(num))?;
    }
    written.push(ts.finish()?);

    let node_header: Vec<String> = (0..grid.nodes()).map(|j| format!("x_{j}")).collect();
    for (name, rows) in [
        ("heatmap_v1.csv", &record.heatmap_v1),
        ("heatmap_v2.csv", &record.heatmap_v2),
    ] {
        let mut sheet = Sheet::create(dir, name, &node_header)?;
        for row in rows {
            sheet.row(row.iter().map(|&x| num(x)))?;
        }
        written.push(sheet.finish()?);
    }

    let mut sm = Sheet::create(dir, "summary.csv", &owned(&SUMMARY_HEADER))?;
    if !record.is_empty() {
        sm.row([
            num(record.final_growth_rate),
            summary.classification.to_string(),
            num(summary.wall_time_s),
            summary.seed.to_string(),
            summary.config_hash.clone(),
            num(record.min_v1),
            num(record.min_v2),
        ])?;
    }
    written.push(sm.finish()?);
    Ok(written)
}

/// Writes `sweep.csv`, one row per cell with `C_rho` as the slow index.
/// Cells whose run failed are classified `failed`.
pub fn emit_sweep(result: &SweepResult, dir: &Path) -> Result<PathBuf, OutputError> {
    let mut sheet = Sheet::create(dir, "sweep.csv", &owned(&SWEEP_HEADER))?;
    for (i, &c_rho) in result.c_rho_values.iter().enumerate() {
        for (j, &f) in result.f_values.iter().enumerate() {
            let cell = result.cell(i, j);
            let class = match &cell.classification {
                Ok(c) => c.to_string(),
                Err(_) => "failed".to_string(),
            };
            sheet.row([num(c_rho), num(f), num(cell.growth_rate), class])?;
        }
    }
    sheet.finish()
}

/// Writes `verify.csv` with one row per check.
pub fn emit_verify(reports: &[CheckReport], dir: &Path) -> Result<PathBuf, OutputError> {
    let mut sheet = Sheet::create(dir, "verify.csv", &owned(&VERIFY_HEADER))?;
    for r in reports {
        let cmp = match r.comparison {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        };
        sheet.row([
            r.name.clone(),
            r.passed.to_string(),
            num(r.measured),
            cmp.to_string(),
            num(r.tolerance),
            r.seed.to_string(),
            r.details.clone(),
        ])?;
    }
    sheet.finish()
}

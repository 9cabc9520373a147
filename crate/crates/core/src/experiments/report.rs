use std::fs;
use std::path::PathBuf;

use super::config::ExperimentConfig;
use super::grid::GridReport;
use super::scaling::ScalingReport;
use crate::embedding::write_text;
use crate::error::{Error, Result};

/// A score in `[0, 1]` as a percentage with two decimals.
pub(crate) fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

/// Free text made safe for one TSV cell.
pub(crate) fn cell_text(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// Either kind of experiment result table.
#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentReport {
    Grid(GridReport),
    Scaling(ScalingReport),
}

impl ExperimentReport {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentReport::Grid(_) => "grid",
            ExperimentReport::Scaling(_) => "scaling",
        }
    }

    pub fn to_tsv(&self) -> String {
        match self {
            ExperimentReport::Grid(r) => r.to_tsv(),
            ExperimentReport::Scaling(r) => r.to_tsv(),
        }
    }

    pub fn timings_tsv(&self) -> String {
        match self {
            ExperimentReport::Grid(r) => r.timings_tsv(),
            ExperimentReport::Scaling(r) => r.timings_tsv(),
        }
    }
}

/// Files written for one report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportFiles {
    pub report: PathBuf,
    pub timings: PathBuf,
    pub effective_config: PathBuf,
}

/// Writes `<name>.tsv`, `<name>.timings.tsv` and `<name>.config.toml` (the
/// effective config with defaults materialized) into the output directory.
pub fn write_report(config: &ExperimentConfig, report: &ExperimentReport) -> Result<ReportFiles> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = report.name();
    let files = ReportFiles {
        report: dir.join(format!("{name}.tsv")),
        timings: dir.join(format!("{name}.timings.tsv")),
        effective_config: dir.join(format!("{name}.config.toml")),
    };
    write_text(&files.report, &report.to_tsv())?;
    write_text(&files.timings, &report.timings_tsv())?;
    config.save(&files.effective_config)?;
    Ok(files)
}

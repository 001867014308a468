use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::EpisodeRecord;
use crate::planner::Plan;
use crate::{Error, Result};

use super::write_atomic;

/// Episodes up to this index are all kept in learning-curve files; after
/// it only every `CURVE_STRIDE`-th one is.
pub const CURVE_FULL_EPISODES: usize = 10_000;
pub const CURVE_STRIDE: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: String,
    pub method: String,
    pub view_count: usize,
    pub coverage_fraction: f64,
    /// Empty when the plan did not record a runtime.
    pub runtime_seconds: Option<f64>,
    /// λ values joined with `;`.
    pub lambda_sequence: String,
}

impl ReportRow {
    pub fn from_plan(instance: &str, plan: &Plan) -> Self {
        ReportRow {
            instance: instance.to_string(),
            method: plan.method.clone(),
            view_count: plan.len(),
            coverage_fraction: plan.final_coverage_fraction,
            runtime_seconds: plan.runtime_seconds,
            lambda_sequence: plan
                .lambdas
                .iter()
                .map(|l| format!("{l}"))
                .collect::<Vec<_>>()
                .join(";"),
        }
    }
}

/// One row per method per instance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    rows: Vec<ReportRow>,
}

impl RunReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: ReportRow) -> Result<()> {
        if self
            .rows
            .iter()
            .any(|r| r.instance == row.instance && r.method == row.method)
        {
            return Err(Error::input(format!(
                "report already has a '{}' row for instance '{}'",
                row.method, row.instance
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn instances(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.instance.as_str()).collect()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record([
                "instance",
                "method",
                "view_count",
                "coverage_fraction",
                "runtime_seconds",
                "lambda_sequence",
            ])?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.into_inner().map_err(|e| Error::input(e.to_string()))
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self> {
        let mut report = RunReport::new();
        for row in csv::Reader::from_reader(bytes).deserialize() {
            report.push(row?)?;
        }
        Ok(report)
    }
}

pub fn write_report(path: &Path, report: &RunReport) -> Result<()> {
    write_atomic(path, &report.to_csv()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    /// 1-based episode index.
    pub episode: usize,
    pub length: usize,
    #[serde(rename = "return")]
    pub ret: f64,
}

pub fn learning_curve_rows(log: &[EpisodeRecord]) -> Vec<CurveRow> {
    log.iter()
        .enumerate()
        .map(|(i, r)| CurveRow {
            episode: i + 1,
            length: r.length,
            ret: r.ret,
        })
        .filter(|r| r.episode <= CURVE_FULL_EPISODES || r.episode % CURVE_STRIDE == 0)
        .collect()
}

pub fn write_learning_curve(path: &Path, log: &[EpisodeRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if log.is_empty() {
        w.write_record(["episode", "length", "return"])?;
    }
    for row in learning_curve_rows(log) {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::input(e.to_string()))?;
    write_atomic(path, &bytes)
}

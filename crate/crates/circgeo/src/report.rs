//! Machine-readable reports: canonical JSON and a flat CSV projection.

use std::io::Write;

use circgeo_core::CLOSED_FORM_ERRATA;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub point_index: usize,
    pub point: [f64; 3],
    pub check: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub values: Option<Value>,
}

impl Record {
    pub fn new(point_index: usize, point: [f64; 3], check: &str, status: Status) -> Self {
        Self {
            point_index,
            point,
            check: check.to_string(),
            status,
            residual: None,
            tolerance: None,
            reason: None,
            values: None,
        }
    }

    /// Passing when `residual <= tolerance`.
    pub fn bounded(point_index: usize, point: [f64; 3], check: &str, residual: f64, tolerance: f64) -> Self {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        Self { residual: Some(residual), tolerance: Some(tolerance), ..Self::new(point_index, point, check, status) }
    }

    /// Passing when `residual > threshold`.
    pub fn exceeding(point_index: usize, point: [f64; 3], check: &str, residual: f64, threshold: f64) -> Self {
        let status = if residual > threshold { Status::Pass } else { Status::Fail };
        Self { residual: Some(residual), tolerance: Some(threshold), ..Self::new(point_index, point, check, status) }
    }

    pub fn skipped(point_index: usize, point: [f64; 3], check: &str, reason: impl Into<String>) -> Self {
        Self { reason: Some(reason.into()), ..Self::new(point_index, point, check, Status::Skipped) }
    }

    pub fn with_values(mut self, values: Value) -> Self {
        self.values = Some(values);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass_count: usize,
    pub fail_count: usize,
    pub skipped_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErratumNote {
    pub symbol: String,
    pub printed: String,
    pub corrected: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub command: String,
    pub config: RunConfig,
    pub summary: Summary,
    pub records: Vec<Record>,
    pub errata: Vec<ErratumNote>,
}

impl VerificationReport {
    /// Sorts records by point index then check name and fills in the summary.
    pub fn new(command: &str, config: RunConfig, mut records: Vec<Record>) -> Self {
        records.sort_by(|a, b| a.point_index.cmp(&b.point_index).then_with(|| a.check.cmp(&b.check)));
        let mut summary = Summary { total: records.len(), ..Summary::default() };
        for r in &records {
            match r.status {
                Status::Pass => summary.pass_count += 1,
                Status::Fail => summary.fail_count += 1,
                Status::Skipped => summary.skipped_count += 1,
            }
        }
        let errata = CLOSED_FORM_ERRATA
            .iter()
            .map(|e| ErratumNote {
                symbol: e.symbol.into(),
                printed: e.printed.into(),
                corrected: e.corrected.into(),
                note: e.note.into(),
            })
            .collect();
        Self { command: command.to_string(), config, summary, records, errata }
    }

    pub fn exit_code(&self) -> i32 {
        if self.summary.fail_count == 0 {
            0
        } else {
            1
        }
    }

    pub fn write_json(&self, out: &mut impl Write) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)?;
        Ok(())
    }

    /// One row per record. `scan` reports use their dedicated column layout.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        if self.command == "scan" {
            w.write_record(["index", "x1", "x2", "x3", "A", "B", "D", "nondegenerate", "definite", "mu_e1"])?;
            for r in &self.records {
                let v = r.values.as_ref();
                let num = |k: &str| v.and_then(|v| v.get(k)).map(value_cell).unwrap_or_default();
                w.write_record([
                    r.point_index.to_string(),
                    r.point[0].to_string(),
                    r.point[1].to_string(),
                    r.point[2].to_string(),
                    num("A"),
                    num("B"),
                    num("D"),
                    num("nondegenerate"),
                    num("definite"),
                    num("mu_e1"),
                ])?;
            }
        } else {
            w.write_record(["index", "x1", "x2", "x3", "check", "status", "residual", "tolerance", "reason"])?;
            for r in &self.records {
                let status = match r.status {
                    Status::Pass => "pass",
                    Status::Fail => "fail",
                    Status::Skipped => "skipped",
                };
                w.write_record([
                    r.point_index.to_string(),
                    r.point[0].to_string(),
                    r.point[1].to_string(),
                    r.point[2].to_string(),
                    r.check.clone(),
                    status.to_string(),
                    r.residual.map(|x| x.to_string()).unwrap_or_default(),
                    r.tolerance.map(|x| x.to_string()).unwrap_or_default(),
                    r.reason.clone().unwrap_or_default(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn value_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

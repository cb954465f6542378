//! Study report types and emission. JSON carries the full report including
//! a config echo; CSV flattens the entries. Wall-clock time is deliberately
//! kept out of both so that reruns of the same config produce byte-identical
//! files.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::StudyConfig;
use crate::csvio::fmt_real;
use crate::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct EstimateEntry {
    pub estimator: String,
    /// Loss digest for Bayes entries; absent for the loss-independent
    /// plug-in and predictive estimators.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<String>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ess: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_std_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub config: StudyConfig,
    pub seed: u64,
    /// How the posterior was produced (closed form or sampler), with any
    /// sampler diagnostics.
    pub posterior: String,
    pub diagnostics: Vec<String>,
    pub entries: Vec<EstimateEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(CliError::config(format!(
                "unknown report format {other:?}: expected json or csv"
            ))),
        }
    }
}

pub fn render_json(report: &EstimateReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn render_csv(report: &EstimateReport) -> String {
    let mut out = String::from("estimator,loss,value,ess,mc_std_error\n");
    for e in &report.entries {
        let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.estimator,
            e.loss.as_deref().unwrap_or(""),
            fmt_real(e.value),
            opt(e.ess),
            opt(e.mc_std_error),
        ));
    }
    out
}

pub fn emit_report(report: &EstimateReport, path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Json => render_json(report),
        ReportFormat::Csv => render_csv(report),
    };
    fs::write(path, text)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StudyConfig;

    fn tiny_report() -> EstimateReport {
        let cfg: StudyConfig = serde_json::from_str(
            r#"{
                "model": "exponential",
                "prior": {"family": "exp-inverse-gamma", "n0": 2.0, "s0": 10.0},
                "data": {"inline": [1.0, 2.0]},
                "quantity": {"kind": "mean"},
                "estimators": ["mle"],
                "seed": 3
            }"#,
        )
        .unwrap();
        EstimateReport {
            config: cfg,
            seed: 3,
            posterior: "closed form".into(),
            diagnostics: vec![],
            entries: vec![
                EstimateEntry {
                    estimator: "mle".into(),
                    loss: None,
                    value: 1.5,
                    ess: None,
                    mc_std_error: None,
                },
                EstimateEntry {
                    estimator: "bayes".into(),
                    loss: Some("quadratic(scale=1)".into()),
                    value: 12.0 / 3.0,
                    ess: Some(512.0),
                    mc_std_error: Some(0.01),
                },
            ],
        }
    }

    #[test]
    fn csv_has_header_and_lf_endings() {
        let text = render_csv(&tiny_report());
        let mut lines = text.split_inclusive('\n');
        assert_eq!(lines.next().unwrap(), "estimator,loss,value,ess,mc_std_error\n");
        assert!(!text.contains('\r'), "CSV must use LF line endings only");
        assert_eq!(text.lines().count(), 3, "header plus one row per entry");
    }

    #[test]
    fn missing_diagnostics_leave_empty_fields() {
        let text = render_csv(&tiny_report());
        let mle_row = text.lines().nth(1).unwrap();
        assert_eq!(mle_row.split(',').count(), 5);
        assert!(mle_row.ends_with(",,"), "mle row should have empty ess and se: {mle_row}");
    }

    #[test]
    fn json_rendering_is_stable() {
        let a = render_json(&tiny_report());
        let b = render_json(&tiny_report());
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        assert!(a.contains("\"posterior\""));
    }
}

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::reference::{reference_table, ReferenceEntry};
use super::suite::BenchmarkReport;
use crate::ecm::{simulate_terminal_voltage, EcmParams, OcvCurve};
use crate::error::{Error, Result};
use crate::optimize::{FitProblem, FitReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [
        ReportFormat::Csv,
        ReportFormat::Markdown,
        ReportFormat::Json,
    ];

    pub fn summary_file(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "summary.csv",
            ReportFormat::Markdown => "summary.md",
            ReportFormat::Json => "summary.json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!(
                "unknown report format `{other}`; expected csv, markdown or json"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub report: BenchmarkReport,
    pub reference: Vec<ReferenceEntry>,
}

fn opt(v: Option<f64>, exp: bool) -> String {
    match v {
        Some(x) if exp => format!("{x:e}"),
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn rows_csv(report: &BenchmarkReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method",
        "problem",
        "cell_id",
        "cycle_index",
        "source",
        "seed",
        "mse",
        "et_s",
        "converged",
        "error",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.method.key().to_string(),
            r.problem.to_string(),
            r.cell_id.clone(),
            r.cycle_index.to_string(),
            r.source.clone(),
            r.seed.to_string(),
            opt(r.mse, true),
            opt(r.et, false),
            r.converged.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Config(e.to_string()))
}

fn summary_csv(report: &BenchmarkReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "block",
        "Method",
        "MSE",
        "ET (s)",
        "MSE mean",
        "ET mean (s)",
        "runs",
        "failed",
    ])?;
    for a in &report.aggregates {
        w.write_record([
            "measured".to_string(),
            a.method.label().to_string(),
            opt(a.median_mse, true),
            opt(a.median_et, false),
            opt(a.mean_mse, true),
            opt(a.mean_et, false),
            a.runs.to_string(),
            a.failed.to_string(),
        ])?;
    }
    for e in reference_table() {
        w.write_record([
            "reference".to_string(),
            e.method,
            format!("{:e}", e.mse),
            format!("{}", e.et),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Config(e.to_string()))
}

fn summary_markdown(report: &BenchmarkReport) -> String {
    let mut s = String::new();
    let cell = |v: Option<f64>, exp: bool| match v {
        Some(_) => opt(v, exp),
        None => "n/a".to_string(),
    };
    s.push_str("| Method | MSE | ET (s) |\n|---|---|---|\n");
    for a in &report.aggregates {
        let _ = writeln!(
            s,
            "| {} | {} | {} |",
            a.method.label(),
            cell(a.median_mse, true),
            cell(a.median_et, false)
        );
    }
    let failed: usize = report.aggregates.iter().map(|a| a.failed).sum();
    let _ = writeln!(
        s,
        "\nMedians over successful runs. Runs: {}, failed: {failed}.",
        report.rows.len()
    );
    s.push_str("\n## reference\n\n| Method | MSE | ET (s) |\n|---|---|---|\n");
    for e in reference_table() {
        let _ = writeln!(s, "| {} | {:e} | {} |", e.method, e.mse, e.et);
    }
    s
}

/// Write `report.csv` plus one summary file per requested format into `dir`.
/// Returns the paths written.
pub fn emit_report(
    report: &BenchmarkReport,
    dir: impl AsRef<Path>,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let path = dir.join("report.csv");
    write_file(&path, &rows_csv(report)?)?;
    written.push(path);

    for f in formats {
        let path = dir.join(f.summary_file());
        let bytes = match f {
            ReportFormat::Csv => summary_csv(report)?,
            ReportFormat::Markdown => summary_markdown(report).into_bytes(),
            ReportFormat::Json => {
                let doc = SummaryDocument {
                    report: report.clone(),
                    reference: reference_table(),
                };
                let mut text = serde_json::to_string_pretty(&doc)?;
                text.push('\n');
                text.into_bytes()
            }
        };
        write_file(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

/// Read back a `summary.json` written by [`emit_report`].
pub fn read_summary_json(path: impl AsRef<Path>) -> Result<SummaryDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn overlay_file_name(cell_id: &str, cycle_index: i64, report: &FitReport) -> String {
    format!(
        "overlay_{}_{}_{}.csv",
        sanitize(cell_id),
        cycle_index,
        report.method.key()
    )
}

/// Write `time_s,v_measured,v_predicted` for every sample of the problem's
/// segment, re-simulating the report's parameters. Returns the file path.
pub fn emit_overlay(
    problem: &FitProblem,
    report: &FitReport,
    dir: impl AsRef<Path>,
) -> Result<PathBuf> {
    let params: EcmParams = report.best_params;
    let joint;
    let ocv = match (problem.ocv(), &report.ocv_coefficients) {
        (Some(curve), _) => curve,
        (None, Some(coeffs)) => {
            joint = OcvCurve::unchecked(coeffs.clone());
            &joint
        }
        (None, None) => {
            return Err(Error::InvalidParams(
                "joint problem but the report has no OCV coefficients".into(),
            ))
        }
    };
    let seg = problem.segment();
    let sim = simulate_terminal_voltage(&params, ocv, problem.cell(), &seg.time, &seg.current)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time_s", "v_measured", "v_predicted"])?;
    for k in 0..seg.len() {
        w.write_record([
            format!("{}", seg.time[k]),
            format!("{}", seg.voltage[k]),
            format!("{}", sim.voltage[k]),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;

    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(overlay_file_name(&seg.cell_id, seg.cycle_index, report));
    write_file(&path, &bytes)?;
    Ok(path)
}

//! Rendering of interval results, simulation metrics, and appropriateness
//! reports as human tables, CSV, or JSON.
//!
//! Human tables round to 6 significant digits; machine formats keep full
//! precision (the shortest representation that parses back bit-exactly).

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::data::{IntervalResult, ScenarioMetrics, ScenarioSpec};
use crate::io::IoError;
use crate::simulation::{AppropriatenessRow, GridSummary, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Formats with 6 significant digits for human tables.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.000000".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// One output row for an interval result; `None` fields render empty in
/// CSV and `null` in JSON.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalRow {
    pub method: String,
    pub status: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub width: Option<f64>,
    pub reason: Option<String>,
    pub flags: String,
}

impl IntervalRow {
    pub fn from_result(r: &IntervalResult) -> Self {
        let (lower, upper) = match r.limits() {
            Some((l, u)) => (Some(l), Some(u)),
            None => (None, None),
        };
        IntervalRow {
            method: r.method.name().to_string(),
            status: if r.exists() { "ok" } else { "nonexistent" }.to_string(),
            lower,
            upper,
            width: r.width(),
            reason: r.reason().map(|x| x.name().to_string()),
            flags: r.flags.to_string(),
        }
    }
}

fn write_csv_rows<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| IoError::Validation(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<W: Write, T: Serialize>(mut writer: W, rows: &[T]) -> Result<(), IoError> {
    serde_json::to_writer_pretty(&mut writer, rows)
        .map_err(|e| IoError::Validation(e.to_string()))?;
    writeln!(writer)?;
    Ok(())
}

/// Renders the 17 interval results in the requested format.
pub fn render_intervals<W: Write>(
    results: &[IntervalResult],
    format: OutputFormat,
    mut writer: W,
) -> Result<(), IoError> {
    let rows: Vec<IntervalRow> = results.iter().map(IntervalRow::from_result).collect();
    match format {
        OutputFormat::Csv => write_csv_rows(writer, &rows),
        OutputFormat::Json => write_json(writer, &rows),
        OutputFormat::Table => {
            writeln!(
                writer,
                "{:<8}{:>14}{:>14}{:>14}  flags",
                "method", "lower", "upper", "width"
            )?;
            for row in &rows {
                match (row.lower, row.upper, row.width) {
                    (Some(l), Some(u), Some(w)) => writeln!(
                        writer,
                        "{:<8}{:>14}{:>14}{:>14}  {}",
                        row.method,
                        sig6(l),
                        sig6(u),
                        sig6(w),
                        row.flags
                    )?,
                    _ => writeln!(
                        writer,
                        "{:<8}{:>14}  nonexistent: {}",
                        row.method,
                        "-",
                        row.reason.as_deref().unwrap_or("?")
                    )?,
                }
            }
            Ok(())
        }
    }
}

/// One output row of per-cell, per-method simulation metrics.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub clusters: u32,
    pub size: u32,
    pub gamma1: f64,
    pub eta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub alpha: f64,
    pub method: String,
    pub status: String,
    pub cp: Option<f64>,
    pub ew: Option<f64>,
    pub disncp: Option<f64>,
    pub mesncp: Option<f64>,
    pub dnptnp: Option<f64>,
    pub rejected_samples: Option<u64>,
    pub nonexistent: Option<u64>,
}

/// Flattens grid results into rows: 17 rows per completed cell, one
/// `stalled` row for a cell that hit its rejection cap.
pub fn metrics_rows(cells: &[(ScenarioSpec, Result<ScenarioMetrics, SimError>)]) -> Vec<MetricsRow> {
    let mut rows = Vec::new();
    for (spec, outcome) in cells {
        match outcome {
            Ok(metrics) => {
                for m in &metrics.per_method {
                    rows.push(MetricsRow {
                        clusters: spec.clusters_per_group,
                        size: spec.cluster_size,
                        gamma1: spec.gamma1,
                        eta: spec.eta,
                        theta1: spec.theta1,
                        theta2: spec.theta2,
                        alpha: spec.alpha,
                        method: m.method.name().to_string(),
                        status: "ok".into(),
                        cp: Some(m.cp),
                        ew: Some(m.ew),
                        disncp: Some(m.disncp),
                        mesncp: Some(m.mesncp),
                        dnptnp: m.dnptnp,
                        rejected_samples: Some(metrics.rejected_samples),
                        nonexistent: Some(m.nonexistent),
                    });
                }
            }
            Err(SimError::Stalled { rejected, .. }) => rows.push(MetricsRow {
                clusters: spec.clusters_per_group,
                size: spec.cluster_size,
                gamma1: spec.gamma1,
                eta: spec.eta,
                theta1: spec.theta1,
                theta2: spec.theta2,
                alpha: spec.alpha,
                method: "*".into(),
                status: "stalled".into(),
                cp: None,
                ew: None,
                disncp: None,
                mesncp: None,
                dnptnp: None,
                rejected_samples: Some(*rejected),
                nonexistent: None,
            }),
            Err(other) => rows.push(MetricsRow {
                clusters: spec.clusters_per_group,
                size: spec.cluster_size,
                gamma1: spec.gamma1,
                eta: spec.eta,
                theta1: spec.theta1,
                theta2: spec.theta2,
                alpha: spec.alpha,
                method: "*".into(),
                status: format!("error: {other}"),
                cp: None,
                ew: None,
                disncp: None,
                mesncp: None,
                dnptnp: None,
                rejected_samples: None,
                nonexistent: None,
            }),
        }
    }
    rows
}

/// Writes the per-cell metrics rows as CSV.
pub fn render_metrics_csv<W: Write>(
    cells: &[(ScenarioSpec, Result<ScenarioMetrics, SimError>)],
    writer: W,
) -> Result<(), IoError> {
    write_csv_rows(writer, &metrics_rows(cells))
}

#[derive(Debug, Clone, Serialize)]
pub struct MedianRow {
    pub method: String,
    pub cp: f64,
    pub ew: f64,
    pub dnptnp: Option<f64>,
}

/// Renders the per-method grid medians.
pub fn render_medians<W: Write>(
    summary: &GridSummary,
    format: OutputFormat,
    mut writer: W,
) -> Result<(), IoError> {
    let rows: Vec<MedianRow> = summary
        .per_method
        .iter()
        .map(|m| MedianRow {
            method: m.method.name().to_string(),
            cp: m.cp,
            ew: m.ew,
            dnptnp: m.dnptnp,
        })
        .collect();
    match format {
        OutputFormat::Csv => write_csv_rows(writer, &rows),
        OutputFormat::Json => write_json(writer, &rows),
        OutputFormat::Table => {
            writeln!(
                writer,
                "{:<8}{:>12}{:>12}{:>15}",
                "method", "median CP", "median EW", "median DNPTNP"
            )?;
            for r in &rows {
                writeln!(
                    writer,
                    "{:<8}{:>12}{:>12}{:>15}",
                    r.method,
                    format!("{:.3}", r.cp),
                    format!("{:.3}", r.ew),
                    r.dnptnp.map_or("-".into(), |d| format!("{d:.3}")),
                )?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AppropriatenessOutRow {
    pub method: String,
    pub cp: f64,
    pub ew: f64,
    pub dnptnp: Option<f64>,
    pub cp_check: String,
    pub location_check: String,
    pub width_check: String,
}

/// Renders an appropriateness report with PASS/FLAG qualification columns.
pub fn render_appropriateness<W: Write>(
    rows: &[AppropriatenessRow],
    format: OutputFormat,
    mut writer: W,
) -> Result<(), IoError> {
    let out: Vec<AppropriatenessOutRow> = rows
        .iter()
        .map(|r| AppropriatenessOutRow {
            method: r.method.name().to_string(),
            cp: r.cp,
            ew: r.ew,
            dnptnp: r.dnptnp,
            cp_check: if r.cp_ok { "PASS" } else { "FLAG" }.into(),
            location_check: if r.location_ok { "PASS" } else { "FLAG" }.into(),
            width_check: if r.width_anomaly { "FLAG" } else { "PASS" }.into(),
        })
        .collect();
    match format {
        OutputFormat::Csv => write_csv_rows(writer, &out),
        OutputFormat::Json => write_json(writer, &out),
        OutputFormat::Table => {
            writeln!(
                writer,
                "{:<8}{:>9}{:>11}{:>9}  {:<5}{:<9}{:<6}",
                "method", "CP", "EW", "DNPTNP", "cp", "location", "width"
            )?;
            for r in &out {
                writeln!(
                    writer,
                    "{:<8}{:>9}{:>11}{:>9}  {:<5}{:<9}{:<6}",
                    r.method,
                    format!("{:.3}", r.cp),
                    format!("{:.3}", r.ew),
                    r.dnptnp.map_or("-".into(), |d| format!("{d:.3}")),
                    r.cp_check,
                    r.location_check,
                    r.width_check,
                )?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Method, NonexistenceReason};

    #[test]
    fn sig6_rounds_to_six_significant_digits() {
        assert_eq!(sig6(1.2345678), "1.23457");
        assert_eq!(sig6(0.00123456789), "0.00123457");
        assert_eq!(sig6(123456.789), "123457");
        assert_eq!(sig6(171.86817550472574), "171.868");
    }

    #[test]
    fn interval_rows_carry_reason_and_full_precision() {
        // 0.1 + 0.2 needs all 17 digits to round-trip
        let lower = 0.1 + 0.2;
        let results = vec![
            IntervalResult::interval(Method::MK1, lower, 2.5),
            IntervalResult::nonexistent(Method::MR3, NonexistenceReason::ANonpositive),
        ];
        let mut buf = Vec::new();
        render_intervals(&results, OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("MK1,ok,0.30000000000000004,2.5,"), "{text}");
        assert!(text.contains("MR3,nonexistent,,,,A_NONPOSITIVE,"), "{text}");

        let mut buf = Vec::new();
        render_intervals(&results, OutputFormat::Json, &mut buf).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(parsed[0]["lower"].as_f64(), Some(lower));
        assert_eq!(parsed[1]["reason"].as_str(), Some("A_NONPOSITIVE"));
    }

    #[test]
    fn table_format_marks_nonexistent_rows() {
        let results = vec![IntervalResult::nonexistent(
            Method::MR3,
            NonexistenceReason::DiscriminantNegative,
        )];
        let mut buf = Vec::new();
        render_intervals(&results, OutputFormat::Table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("nonexistent: DISCRIMINANT_NEGATIVE"));
    }
}

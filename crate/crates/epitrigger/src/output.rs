//! Long-format CSV result documents.
//!
//! Every document starts with `#` metadata lines, then one header row, then
//! data rows. Numbers are written in `{:.15e}` form so output is
//! byte-stable and keeps 16 significant digits.

use std::fmt::Write as _;
use std::io;

use epitrigger_core::{SimResult, SweepResult, Trajectory};
use thiserror::Error;

pub const TRAJECTORY_HEADER: &str = "phase,time,compartment,value_fraction";
pub const SWEEP_HEADER: &str =
    "axis1_value,axis2_value,final_size,detection_time,peak_prevalence,truncated,error";

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("missing header `{0}`")]
    MissingHeader(&'static str),
    #[error("row {row}: expected {expected} fields, got {got}")]
    FieldCount {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("row {row}: cannot parse `{text}`")]
    Field { row: usize, text: String },
}

fn num(x: f64) -> String {
    format!("{x:.15e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn push_metadata(out: &mut String, metadata: &[String]) {
    for line in metadata {
        let _ = writeln!(out, "# {line}");
    }
}

/// Appends one row per sample and compartment.
pub fn push_trajectory<const D: usize>(out: &mut String, phase: u8, traj: &Trajectory<D>) {
    let n = traj.population();
    for (t, state) in traj.times().iter().zip(traj.states()) {
        for (label, value) in traj.labels().iter().zip(state) {
            let _ = writeln!(out, "{phase},{},{label},{}", num(*t), num(value / n));
        }
    }
}

/// Summary metadata of a single run.
pub fn run_summary(result: &SimResult) -> Vec<String> {
    vec![
        format!("result.final_size = {}", num(result.final_size)),
        format!("result.peak_prevalence = {}", num(result.peak_prevalence)),
        format!("result.peak_time = {}", num(result.peak_time)),
        format!("result.detection_time = {}", opt_num(result.detection_time)),
        format!(
            "result.detection_day = {}",
            result
                .detection_day
                .map(|d| d.to_string())
                .unwrap_or_default()
        ),
        format!(
            "result.trigger_prevalence = {}",
            opt_num(result.trigger_prevalence)
        ),
        format!("result.end_time = {}", num(result.end_time)),
        format!("result.truncated = {}", result.truncated),
    ]
}

/// Trajectory document: phase 1 rows (S, I, R) then phase 2 rows
/// (U, A, C, Q, I, R), time-major within each phase.
pub fn trajectory_document(result: &SimResult, metadata: &[String]) -> String {
    let mut out = String::new();
    push_metadata(&mut out, metadata);
    push_metadata(&mut out, &run_summary(result));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    push_trajectory(&mut out, 1, &result.phase1);
    if let Some(p2) = &result.phase2 {
        push_trajectory(&mut out, 2, p2);
    }
    out
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n', '\r'], ";")
}

/// Sweep document, axis1-major.
pub fn sweep_document(result: &SweepResult, metadata: &[String]) -> String {
    let mut out = String::new();
    push_metadata(&mut out, metadata);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    let (_, cols) = result.shape();
    let v2 = result.axes.get(1).map(|a| a.values());
    for (i, a1) in result.axes[0].values().into_iter().enumerate() {
        let a1 = num(a1);
        for j in 0..cols {
            let a2 = v2.as_ref().map(|v| num(v[j])).unwrap_or_default();
            let line = match result.cell(i, j) {
                Ok(m) => format!(
                    "{a1},{a2},{},{},{},{},",
                    num(m.final_size),
                    opt_num(m.detection_time),
                    num(m.peak_prevalence),
                    m.truncated
                ),
                Err(e) => {
                    format!("{a1},{a2},,,,,{}", sanitize(&e.to_string()))
                }
            };
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

pub fn write_document(path: &std::path::Path, document: &str) -> io::Result<()> {
    std::fs::write(path, document)
}

/// A parsed trajectory row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub phase: u8,
    pub time: f64,
    pub compartment: String,
    pub value_fraction: f64,
}

/// A parsed sweep row. Numeric fields are absent when the cell failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis1_value: f64,
    pub axis2_value: Option<f64>,
    pub final_size: Option<f64>,
    pub detection_time: Option<f64>,
    pub peak_prevalence: Option<f64>,
    pub truncated: Option<bool>,
    pub error: Option<String>,
}

/// Data rows after the metadata block and header.
fn data_rows<'a>(text: &'a str, header: &'static str) -> Result<Vec<&'a str>, ReadError> {
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    if lines.next() != Some(header) {
        return Err(ReadError::MissingHeader(header));
    }
    Ok(lines.filter(|l| !l.is_empty()).collect())
}

/// Metadata lines of any result document.
pub fn read_metadata(text: &str) -> Vec<String> {
    text.lines()
        .map_while(|l| l.strip_prefix('#'))
        .map(|m| m.trim_start().to_string())
        .collect()
}

fn field<T: std::str::FromStr>(row: usize, s: &str) -> Result<T, ReadError> {
    s.parse().map_err(|_| ReadError::Field {
        row,
        text: s.to_string(),
    })
}

fn opt_field<T: std::str::FromStr>(row: usize, s: &str) -> Result<Option<T>, ReadError> {
    if s.is_empty() {
        Ok(None)
    } else {
        field(row, s).map(Some)
    }
}

fn fields(row: usize, line: &str, expected: usize) -> Result<Vec<&str>, ReadError> {
    let f: Vec<&str> = line.splitn(expected, ',').collect();
    if f.len() != expected {
        return Err(ReadError::FieldCount {
            row,
            expected,
            got: f.len(),
        });
    }
    Ok(f)
}

pub fn read_trajectory(text: &str) -> Result<Vec<TrajectoryRow>, ReadError> {
    let rows = data_rows(text, TRAJECTORY_HEADER)?;
    rows.iter()
        .enumerate()
        .map(|(k, line)| {
            let row = k + 1;
            let f = fields(row, line, 4)?;
            Ok(TrajectoryRow {
                phase: field(row, f[0])?,
                time: field(row, f[1])?,
                compartment: f[2].to_string(),
                value_fraction: field(row, f[3])?,
            })
        })
        .collect()
}

pub fn read_sweep(text: &str) -> Result<Vec<SweepRow>, ReadError> {
    let rows = data_rows(text, SWEEP_HEADER)?;
    rows.iter()
        .enumerate()
        .map(|(k, line)| {
            let row = k + 1;
            let f = fields(row, line, 7)?;
            Ok(SweepRow {
                axis1_value: field(row, f[0])?,
                axis2_value: opt_field(row, f[1])?,
                final_size: opt_field(row, f[2])?,
                detection_time: opt_field(row, f[3])?,
                peak_prevalence: opt_field(row, f[4])?,
                truncated: opt_field(row, f[5])?,
                error: (!f[6].is_empty()).then(|| f[6].to_string()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_sixteen_digits() {
        assert_eq!(num(0.1), "1.000000000000000e-1");
        let x = 0.123_456_789_012_345_67;
        let back: f64 = num(x).parse().unwrap();
        assert!((back - x).abs() <= 1e-16);
    }

    #[test]
    fn reader_rejects_bad_documents() {
        assert!(matches!(
            read_sweep("# x\nnope\n"),
            Err(ReadError::MissingHeader(_))
        ));
        let bad = format!("{TRAJECTORY_HEADER}\n1,abc,S,0.5\n");
        assert!(matches!(
            read_trajectory(&bad),
            Err(ReadError::Field { row: 1, .. })
        ));
        let short = format!("{TRAJECTORY_HEADER}\n1,0.0\n");
        assert!(matches!(
            read_trajectory(&short),
            Err(ReadError::FieldCount { got: 2, .. })
        ));
    }

    #[test]
    fn metadata_lines_are_read_back() {
        let doc = "# a = 1\n# b = 2 (default)\nheader\n";
        assert_eq!(read_metadata(doc), vec!["a = 1", "b = 2 (default)"]);
    }

    #[test]
    fn error_text_cannot_break_columns() {
        assert_eq!(sanitize("a, b\nc"), "a; b;c");
    }
}

use std::path::Path;
use std::str::FromStr;

use super::{read_file, write_file};
use crate::error::{Error, Result};
use crate::eval::{EvalReport, ReportRow, SampleRecord};

const REPORT_HEADER: [&str; 6] = [
    "group",
    "n",
    "miou_coarse",
    "miou_refined",
    "miou_jfs",
    "success_rate",
];

const DETAILS_HEADER: [&str; 9] = [
    "image_id",
    "class_id",
    "iou_coarse",
    "iou_refined",
    "e_coarse",
    "e_refined",
    "verdict",
    "picked_iou",
    "success",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

fn ratio4(v: f64) -> String {
    format!("{v:.4}")
}

pub(crate) fn report_csv(report: &EvalReport) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(REPORT_HEADER).map_err(csv_err)?;
    for row in &report.rows {
        w.write_record([
            row.group.clone(),
            row.n.to_string(),
            ratio4(row.miou_coarse),
            ratio4(row.miou_refined),
            ratio4(row.miou_jfs),
            ratio4(row.success_rate),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::Format(format!("csv: {}", e.error())))
}

pub(crate) fn report_json(report: &EvalReport) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(report)
        .map_err(|e| Error::Format(format!("json: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// Writes a report. CSV ratios carry four decimals; JSON keeps full precision.
pub fn write_report(report: &EvalReport, path: &Path, format: ReportFormat) -> Result<()> {
    let bytes = match format {
        ReportFormat::Csv => report_csv(report)?,
        ReportFormat::Json => report_json(report)?,
    };
    write_file(path, &bytes)
}

pub fn read_report(path: &Path, format: ReportFormat) -> Result<EvalReport> {
    let bytes = read_file(path)?;
    match format {
        ReportFormat::Json => {
            serde_json::from_slice(&bytes).map_err(|e| Error::Format(format!("json: {e}")))
        }
        ReportFormat::Csv => {
            let mut r = csv::Reader::from_reader(bytes.as_slice());
            let header = r.headers().map_err(csv_err)?.clone();
            if header.iter().ne(REPORT_HEADER) {
                return Err(Error::Format(format!(
                    "{}: unexpected report header",
                    path.display()
                )));
            }
            let mut rows = Vec::new();
            for rec in r.records() {
                let rec = rec.map_err(csv_err)?;
                let num = |i: usize| -> Result<f64> {
                    rec[i].parse().map_err(|_| {
                        Error::Format(format!("{}: bad number `{}`", path.display(), &rec[i]))
                    })
                };
                rows.push(ReportRow {
                    group: rec[0].to_string(),
                    n: rec[1]
                        .parse()
                        .map_err(|_| Error::Format(format!("bad count `{}`", &rec[1])))?,
                    miou_coarse: num(2)?,
                    miou_refined: num(3)?,
                    miou_jfs: num(4)?,
                    success_rate: num(5)?,
                });
            }
            Ok(EvalReport { rows })
        }
    }
}

pub(crate) fn details_csv(records: &[SampleRecord]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(DETAILS_HEADER).map_err(csv_err)?;
    let r6 = |v: f64| format!("{v:.6}");
    for s in records {
        w.write_record([
            s.image_id.clone(),
            s.class_id.to_string(),
            r6(s.iou_coarse_true),
            r6(s.iou_refined_true),
            r6(s.judge.e_coarse),
            r6(s.judge.e_refined),
            s.judge.verdict.to_string(),
            r6(s.picked_iou_true),
            s.success.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::Format(format!("csv: {}", e.error())))
}

/// Per-sample CSV with one row per judged (image, class) pair.
pub fn write_details(records: &[SampleRecord], path: &Path) -> Result<()> {
    write_file(path, &details_csv(records)?)
}

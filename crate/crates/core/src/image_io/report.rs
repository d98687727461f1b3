use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{ClassificationResult, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    /// Picks CSV for a `.csv` extension, JSON otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

#[derive(Serialize)]
struct CsvResidualRow<'a> {
    group: &'a str,
    k: usize,
    n: usize,
    j_complex: Option<f64>,
    j_amplitude: Option<f64>,
    gaic: Option<f64>,
    label: &'a str,
    anchor: bool,
    best: bool,
}

#[derive(Serialize)]
struct CsvAscentRow<'a> {
    level: &'a str,
    supergroup: &'a str,
    subgroup: &'a str,
    lhs: f64,
    rhs: f64,
    pass: bool,
    confidence: Option<f64>,
}

fn label_str(l: Label) -> &'static str {
    match l {
        Label::Genuine => "genuine",
        Label::Pseudo => "pseudo",
        Label::Rejected => "rejected",
        Label::NotApplicable => "not_applicable",
        Label::Trivial => "trivial",
    }
}

/// Path of the ascent-test table written next to a CSV report.
pub fn ascent_csv_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}.ascent.csv"))
}

/// JSON: the full result. CSV: the residual table (one row per tested plane setting) at
/// `path`, plus the ascent tests at [`ascent_csv_path`].
pub fn write_report(result: &ClassificationResult, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match format {
        ReportFormat::Json => {
            let f = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(f);
            serde_json::to_writer_pretty(&mut w, result).map_err(|e| Error::Serialize(e.to_string()))?;
            writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
        }
        ReportFormat::Csv => {
            let csv_err = |e: csv::Error| Error::Serialize(e.to_string());
            let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
            for r in result.residuals.iter().filter(|r| r.label != Label::NotApplicable) {
                w.serialize(CsvResidualRow {
                    group: &r.group,
                    k: r.k,
                    n: r.n,
                    j_complex: r.j_complex,
                    j_amplitude: r.j_amplitude,
                    gaic: r.gaic,
                    label: label_str(r.label),
                    anchor: r.group == result.anchor_plane,
                    best: r.group == result.best_plane,
                })
                .map_err(csv_err)?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
            let apath = ascent_csv_path(path);
            let mut w = csv::Writer::from_path(&apath).map_err(csv_err)?;
            for t in &result.ascent_tests {
                let confidence = result
                    .confidences
                    .iter()
                    .find(|c| c.level == t.level && c.supergroup == t.supergroup && c.subgroup == t.subgroup)
                    .map(|c| c.confidence);
                w.serialize(CsvAscentRow {
                    level: match t.level {
                        crate::symmetrize::ModelLevel::Plane => "plane",
                        crate::symmetrize::ModelLevel::Laue => "laue",
                    },
                    supergroup: &t.supergroup,
                    subgroup: &t.subgroup,
                    lhs: t.lhs,
                    rhs: t.rhs,
                    pass: t.pass,
                    confidence,
                })
                .map_err(csv_err)?;
            }
            w.flush().map_err(|e| Error::io(&apath, e))
        }
    }
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<ClassificationResult> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::Serialize(e.to_string()))
}

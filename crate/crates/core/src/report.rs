//! Report serialization: lossless JSON, an aggregate CSV and a plain-text
//! table laid out like a results table (one row per model and metric, one
//! column per subset, `mean (± std)` cells in percent).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::{EvalReport, Subset, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl ReportFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Json => "report.json",
            ReportFormat::Csv => "report.csv",
            ReportFormat::Text => "report.txt",
        }
    }
}

pub fn to_json(report: &EvalReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn from_json(text: &str) -> Result<EvalReport> {
    Ok(serde_json::from_str(text)?)
}

/// `model,subset,metric,mean,std,runs`, one line per aggregate.
pub fn to_csv(report: &EvalReport) -> String {
    let mut out = String::from("model,subset,metric,mean,std,runs\n");
    for m in &report.models {
        for a in &m.aggregate {
            for (metric, s) in [("purity", a.purity), ("nmi", a.nmi)] {
                let _ = writeln!(out, "{},{},{metric},{},{},{}", m.model, a.subset, s.mean, s.std, m.runs.len());
            }
        }
    }
    out
}

fn cell(s: Summary) -> String {
    format!("{:.2} (± {:.2})", 100.0 * s.mean, 100.0 * s.std)
}

pub fn to_text_table(report: &EvalReport) -> String {
    let subsets: Vec<Subset> = report
        .models
        .first()
        .map(|m| m.aggregate.iter().map(|a| a.subset).collect())
        .unwrap_or_default();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["Model".to_string(), "Metric".to_string()];
    header.extend(subsets.iter().map(|s| format!("{} (%)", s.title())));
    rows.push(header);
    for m in &report.models {
        for (i, metric) in ["Purity", "NMI"].into_iter().enumerate() {
            let mut row = vec![
                if i == 0 { m.model.display_name().to_string() } else { String::new() },
                metric.to_string(),
            ];
            for s in &subsets {
                row.push(match m.aggregate_for(*s) {
                    Some(a) => cell(if i == 0 { a.purity } else { a.nmi }),
                    None => "-".into(),
                });
            }
            rows.push(row);
        }
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();

    let mut out = String::new();
    let runs = report.models.first().map_or(0, |m| m.runs.len());
    let _ = writeln!(
        out,
        "{} documents, {} labels, vocabulary {}; {runs} run(s) per model",
        report.corpus.documents, report.corpus.labels, report.corpus.vocabulary
    );
    for s in &report.subsets {
        let _ = writeln!(out, "  {:<9} {} documents, {} topics", s.subset.title(), s.documents, s.topics);
    }
    out.push('\n');
    for r in &rows {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

pub fn render(report: &EvalReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => to_json(report),
        ReportFormat::Csv => Ok(to_csv(report)),
        ReportFormat::Text => Ok(to_text_table(report)),
    }
}

/// Writes `report.json`, `report.csv` and `report.txt` into `dir`.
pub fn emit_report(report: &EvalReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for f in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Text] {
        let path = dir.join(f.file_name());
        fs::write(&path, render(report, f)?).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

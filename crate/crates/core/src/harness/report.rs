use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::{ConvergenceRecord, StudyConfig};
use crate::datum::InitialDatum;
use crate::error::{invalid, Error, Result};
use crate::reference::{Controller, CONTROLLER};
use crate::schemes::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    /// One `tau error_l2` series per (scheme, ε) under `plotdata/`.
    PlotData,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::Json, ReportFormat::PlotData];
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "plotdata" | "plot" => Ok(ReportFormat::PlotData),
            other => Err(invalid(format!("unknown report format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyMetadata {
    pub code_version: &'static str,
    pub n_points: usize,
    pub final_time: f64,
    pub datum: InitialDatum,
    pub dispersion: Vec<f64>,
    pub norm_r: f64,
    pub dealias: bool,
    pub reference_policy: String,
    pub reference_tol: f64,
    pub controller: Controller,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub epsilons: Vec<f64>,
    pub taus: Vec<f64>,
}

impl StudyMetadata {
    pub fn from_config(config: &StudyConfig) -> Self {
        Self {
            code_version: env!("CARGO_PKG_VERSION"),
            n_points: config.n_points,
            final_time: config.final_time,
            datum: config.datum,
            dispersion: config.polynomial.odd_coefficients().to_vec(),
            norm_r: config.norm_r,
            dealias: config.dealias,
            reference_policy: "adaptive Dormand-Prince 5(4) on Fourier coefficients".into(),
            reference_tol: config.reference_tol,
            controller: CONTROLLER,
            seed: config.seed,
            schemes: config.schemes.clone(),
            epsilons: config.epsilons.clone(),
            taus: config.taus.clone(),
        }
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    metadata: &'a StudyMetadata,
    records: &'a [ConvergenceRecord],
}

pub fn csv_string(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from("scheme,epsilon,tau,error_l2,error_hr,runtime_ms,flag\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{:e},{:e},{},{}",
            r.scheme,
            r.epsilon,
            r.tau,
            r.error_l2,
            r.error_hr,
            r.runtime_ms,
            r.flag.as_str()
        );
    }
    out
}

/// Writes the requested formats into `dir` and returns the created files.
pub fn emit_report(
    records: &[ConvergenceRecord],
    dir: &Path,
    formats: &[ReportFormat],
    metadata: &StudyMetadata,
) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(invalid("no records to report"));
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for format in formats {
        match format {
            ReportFormat::Csv => {
                let path = dir.join("report.csv");
                fs::write(&path, csv_string(records))?;
                written.push(path);
            }
            ReportFormat::Json => {
                let path = dir.join("report.json");
                let text = serde_json::to_string_pretty(&JsonReport { metadata, records })?;
                fs::write(&path, text + "\n")?;
                written.push(path);
            }
            ReportFormat::PlotData => {
                let sub = dir.join("plotdata");
                fs::create_dir_all(&sub)?;
                let mut keys: Vec<(Scheme, f64)> = Vec::new();
                for r in records {
                    if !keys.iter().any(|&(s, e)| s == r.scheme && e == r.epsilon) {
                        keys.push((r.scheme, r.epsilon));
                    }
                }
                for (scheme, eps) in keys {
                    let mut text = format!("# scheme={scheme} epsilon={eps}\n# tau error_l2\n");
                    let mut rows: Vec<&ConvergenceRecord> = records
                        .iter()
                        .filter(|r| r.scheme == scheme && r.epsilon == eps && r.is_ok())
                        .collect();
                    rows.sort_by(|a, b| a.tau.total_cmp(&b.tau));
                    for r in rows {
                        let _ = writeln!(text, "{:e} {:e}", r.tau, r.error_l2);
                    }
                    let path = sub.join(format!("{scheme}_eps{eps}.dat"));
                    fs::write(&path, text)?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::super::RecordFlag;
    use super::*;

    fn records(n: usize) -> Vec<ConvergenceRecord> {
        (0..n)
            .map(|i| ConvergenceRecord {
                scheme: Scheme::Lie,
                epsilon: 1.0,
                tau: 0.1 / (i + 1) as f64,
                error_l2: 1e-2 / (i + 1) as f64,
                error_hr: 2e-2 / (i + 1) as f64,
                runtime_ms: 0.0,
                flag: RecordFlag::Ok,
            })
            .collect()
    }

    #[test]
    fn csv_has_header_plus_rows() {
        let dir = tempfile::tempdir().unwrap();
        let meta = StudyMetadata::from_config(&StudyConfig::default());
        let files = emit_report(&records(3), dir.path(), &[ReportFormat::Csv], &meta).unwrap();
        let text = fs::read_to_string(&files[0]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "scheme,epsilon,tau,error_l2,error_hr,runtime_ms,flag");
        assert!(lines[1].starts_with("lie,1,0.1,"));
        assert!(lines[1].ends_with(",ok"));
    }

    #[test]
    fn empty_records_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let meta = StudyMetadata::from_config(&StudyConfig::default());
        assert!(emit_report(&[], dir.path(), &ReportFormat::ALL, &meta).is_err());
    }

    #[test]
    fn json_carries_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let meta = StudyMetadata::from_config(&StudyConfig::default());
        let files = emit_report(&records(2), dir.path(), &[ReportFormat::Json], &meta).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(v["metadata"]["n_points"], 200);
        assert_eq!(v["records"].as_array().unwrap().len(), 2);
        assert_eq!(v["records"][0]["flag"], "ok");
    }
}

//! CSV tables for estimates and slope reports.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Estimator, SlopeReport, TailEstimate};
use crate::error::{Error, Result};

const ESTIMATE_HEADER: &str = "x,eps,estimator,p,stderr,ci_lo,ci_hi,n_reps,seed";
const SLOPE_HEADER: &str = "x,log_p,predicted";

/// One row of an estimate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub x: f64,
    pub eps: f64,
    pub estimator: Estimator,
    pub p: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_reps: usize,
    pub seed: u64,
}

impl EstimateRecord {
    pub fn new(x: f64, eps: f64, estimate: &TailEstimate, seed: u64) -> Self {
        Self {
            x,
            eps,
            estimator: estimate.estimator,
            p: estimate.probability,
            stderr: estimate.stderr,
            ci_lo: estimate.ci95.0,
            ci_hi: estimate.ci95.1,
            n_reps: estimate.n_reps,
            seed,
        }
    }
}

pub fn write_estimates_csv<W: Write>(records: &[EstimateRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{ESTIMATE_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.x, r.eps, r.estimator, r.p, r.stderr, r.ci_lo, r.ci_hi, r.n_reps, r.seed
        )?;
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn field<T: std::str::FromStr>(s: &str, name: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| parse_err(line, format!("{name}: {e}")))
}

pub fn read_estimates_csv<R: BufRead>(input: R) -> Result<Vec<EstimateRecord>> {
    let mut out = Vec::new();
    let mut header = false;
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header {
            if line != ESTIMATE_HEADER {
                return Err(parse_err(lineno, format!("expected header '{ESTIMATE_HEADER}'")));
            }
            header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(parse_err(lineno, format!("expected 9 fields, got {}", f.len())));
        }
        out.push(EstimateRecord {
            x: field(f[0], "x", lineno)?,
            eps: field(f[1], "eps", lineno)?,
            estimator: f[2].parse().map_err(|e: Error| parse_err(lineno, e.to_string()))?,
            p: field(f[3], "p", lineno)?,
            stderr: field(f[4], "stderr", lineno)?,
            ci_lo: field(f[5], "ci_lo", lineno)?,
            ci_hi: field(f[6], "ci_hi", lineno)?,
            n_reps: field(f[7], "n_reps", lineno)?,
            seed: field(f[8], "seed", lineno)?,
        });
    }
    if !header {
        return Err(parse_err(1, "missing header"));
    }
    Ok(out)
}

/// Writes the per-point rows, then one comment line with the fit summary
/// and one per dropped grid point.
pub fn write_slope_report_csv<W: Write>(report: &SlopeReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SLOPE_HEADER}")?;
    for ((x, l), p) in report.x_grid.iter().zip(&report.log_p).zip(&report.predicted) {
        writeln!(out, "{x},{l},{p}")?;
    }
    writeln!(
        out,
        "# fitted_slope={} target_slope={} relative_error={}",
        report.fitted_slope, report.target_slope, report.relative_error
    )?;
    for x in &report.dropped {
        writeln!(out, "# dropped_x={x}")?;
    }
    Ok(())
}

pub fn read_slope_report_csv<R: BufRead>(input: R) -> Result<SlopeReport> {
    let mut report = SlopeReport {
        x_grid: Vec::new(),
        log_p: Vec::new(),
        predicted: Vec::new(),
        fitted_slope: f64::NAN,
        target_slope: f64::NAN,
        relative_error: f64::NAN,
        dropped: Vec::new(),
    };
    let mut header = false;
    let mut summary = false;
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            for kv in meta.split_whitespace() {
                let Some((k, v)) = kv.split_once('=') else { continue };
                match k {
                    "fitted_slope" => report.fitted_slope = field(v, k, lineno)?,
                    "target_slope" => report.target_slope = field(v, k, lineno)?,
                    "relative_error" => {
                        report.relative_error = field(v, k, lineno)?;
                        summary = true;
                    }
                    "dropped_x" => report.dropped.push(field(v, k, lineno)?),
                    _ => {}
                }
            }
            continue;
        }
        if !header {
            if line != SLOPE_HEADER {
                return Err(parse_err(lineno, format!("expected header '{SLOPE_HEADER}'")));
            }
            header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(parse_err(lineno, format!("expected 3 fields, got {}", f.len())));
        }
        report.x_grid.push(field(f[0], "x", lineno)?);
        report.log_p.push(field(f[1], "log_p", lineno)?);
        report.predicted.push(field(f[2], "predicted", lineno)?);
    }
    if !header || !summary {
        return Err(parse_err(1, "missing header or summary line"));
    }
    Ok(report)
}

//! CSV emission. Floats are written in the shortest form that parses back
//! to the same `f64`, which never needs more than 17 significant digits.

use std::path::{Path, PathBuf};

use robust_bayes_core::ratelab::{CurvePoint, CurveRow, MeasureCurve, RateFit};

use crate::error::{CliError, CliResult};

pub const CURVE_HEADER: [&str; 4] = ["n", "replication", "measure_value", "status"];
pub const FIT_HEADER: [&str; 6] = [
    "slope",
    "stderr",
    "intercept",
    "r_squared",
    "predicted",
    "pass",
];
pub const SUMMARY_HEADER: [&str; 5] = ["n", "median", "q1", "q3", "failures"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn parse_f64(s: &str, what: &str) -> CliResult<f64> {
    s.parse()
        .map_err(|_| CliError::runtime(format!("bad {what} `{s}`")))
}

/// Writes a header row and records; creates the parent directory.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

pub fn curve_rows(curve: &MeasureCurve) -> Vec<Vec<String>> {
    curve
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.replication.to_string(),
                r.value.map(fmt_f64).unwrap_or_default(),
                r.status.clone(),
            ]
        })
        .collect()
}

pub fn write_curve(path: &Path, curve: &MeasureCurve) -> CliResult<()> {
    write_table(path, &CURVE_HEADER, &curve_rows(curve))
}

pub fn read_curve(path: &Path) -> CliResult<Vec<CurveRow>> {
    let (header, rows) = read_table(path)?;
    if header != CURVE_HEADER {
        return Err(CliError::runtime(format!(
            "{} is not a curve table",
            path.display()
        )));
    }
    rows.into_iter()
        .map(|r| {
            Ok(CurveRow {
                n: r[0]
                    .parse()
                    .map_err(|_| CliError::runtime(format!("bad n `{}`", r[0])))?,
                replication: r[1]
                    .parse()
                    .map_err(|_| CliError::runtime(format!("bad replication `{}`", r[1])))?,
                value: if r[2].is_empty() {
                    None
                } else {
                    Some(parse_f64(&r[2], "measure value")?)
                },
                status: r[3].clone(),
            })
        })
        .collect()
}

pub fn write_summary(path: &Path, points: &[CurvePoint]) -> CliResult<()> {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                p.n.to_string(),
                fmt_f64(p.median),
                fmt_f64(p.q1),
                fmt_f64(p.q3),
                p.failures.to_string(),
            ]
        })
        .collect();
    write_table(path, &SUMMARY_HEADER, &rows)
}

pub fn write_fit(path: &Path, fit: &RateFit, pass: bool) -> CliResult<()> {
    let row = vec![
        fmt_f64(fit.slope),
        fmt_f64(fit.slope_stderr),
        fmt_f64(fit.intercept),
        fmt_f64(fit.r_squared),
        fmt_f64(fit.predicted_exponent),
        pass.to_string(),
    ];
    write_table(path, &FIT_HEADER, &[row])
}

pub fn read_fit(path: &Path) -> CliResult<(RateFit, bool)> {
    let (header, rows) = read_table(path)?;
    if header != FIT_HEADER || rows.len() != 1 {
        return Err(CliError::runtime(format!(
            "{} is not a fit table",
            path.display()
        )));
    }
    let r = &rows[0];
    let fit = RateFit {
        slope: parse_f64(&r[0], "slope")?,
        slope_stderr: parse_f64(&r[1], "stderr")?,
        intercept: parse_f64(&r[2], "intercept")?,
        r_squared: parse_f64(&r[3], "r_squared")?,
        predicted_exponent: parse_f64(&r[4], "predicted")?,
    };
    let pass = r[5]
        .parse()
        .map_err(|_| CliError::runtime(format!("bad pass flag `{}`", r[5])))?;
    Ok((fit, pass))
}

/// Where a subcommand writes its files.
#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub prefix: String,
}

impl OutputSpec {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{}{name}", self.prefix))
    }
}

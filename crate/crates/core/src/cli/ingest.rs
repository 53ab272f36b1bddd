//! Reading equally spaced series from CSV files.
//!
//! The file needs a header row. One column holds timestamps, either plain
//! numbers or date-times, and is only used to check that rows are strictly
//! increasing and evenly spaced. Gaps are rejected rather than filled in,
//! since interpolation would bias the lag-1 estimate. The first `2^k` rows
//! are kept.

use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Relative tolerance on the spacing between consecutive timestamps.
const SPACING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFile {
    pub path: PathBuf,
    /// Header name of the timestamp column; `None` means the first column.
    pub time_column: Option<String>,
    /// Header name of the value column; `None` means the second column.
    pub value_column: Option<String>,
    /// Number of rows to keep. `None` keeps the largest power of two that
    /// fits.
    pub length: Option<usize>,
}

impl SeriesFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            time_column: None,
            value_column: None,
            length: None,
        }
    }

    pub fn with_length(mut self, length: Option<usize>) -> Self {
        self.length = length;
        self
    }

    pub fn load(&self) -> Result<Signal> {
        let file = std::fs::File::open(&self.path)
            .map_err(|e| Error::Input(format!("{}: {e}", self.path.display())))?;
        self.read(file, &self.path)
    }

    fn read<R: std::io::Read>(&self, input: R, path: &Path) -> Result<Signal> {
        let where_ = |msg: String| Error::Input(format!("{}: {msg}", path.display()));
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers().map_err(|e| where_(e.to_string()))?.clone();
        let column = |name: &Option<String>, default: usize, what: &str| -> Result<usize> {
            match name {
                Some(n) => headers
                    .iter()
                    .position(|h| h == n)
                    .ok_or_else(|| where_(format!("no {what} column named `{n}`"))),
                None if default < headers.len() => Ok(default),
                None => Err(where_(format!("need at least {} columns", default + 1))),
            }
        };
        let tcol = column(&self.time_column, 0, "timestamp")?;
        let vcol = column(&self.value_column, 1, "value")?;

        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let line = row + 2;
            let record = record.map_err(|e| where_(format!("line {line}: {e}")))?;
            let field = |c: usize| record.get(c).unwrap_or("");
            let t = parse_time(field(tcol)).ok_or_else(|| where_(format!("line {line}: bad timestamp `{}`", field(tcol))))?;
            let v: f64 = field(vcol)
                .parse()
                .map_err(|_| where_(format!("line {line}: bad value `{}`", field(vcol))))?;
            if !v.is_finite() {
                return Err(where_(format!("line {line}: non-finite value")));
            }
            times.push(t);
            values.push(v);
        }
        check_spacing(&times).map_err(where_)?;

        let keep = match self.length {
            Some(n) => {
                if !n.is_power_of_two() || n < 4 {
                    return Err(Error::NonDyadicLength(n));
                }
                if values.len() < n {
                    return Err(Error::InsufficientData(format!(
                        "{} has {} rows, need {n}",
                        path.display(),
                        values.len()
                    )));
                }
                n
            }
            None => {
                if values.len() < 4 {
                    return Err(Error::InsufficientData(format!(
                        "{} has {} rows, need at least 4",
                        path.display(),
                        values.len()
                    )));
                }
                1 << values.len().ilog2()
            }
        };
        values.truncate(keep);
        let dt = if times.len() > 1 { times[1] - times[0] } else { 1.0 };
        Signal::with_timing(values, times[0], dt)
    }
}

/// Timestamp as seconds (date-times) or as the number itself.
fn parse_time(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let secs = |dt: NaiveDateTime| dt.and_utc().timestamp_millis() as f64 / 1000.0;
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp_millis() as f64 / 1000.0);
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M", "%Y/%m/%d %H:%M:%S", "%Y/%m/%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(secs(dt));
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(secs)
}

fn check_spacing(times: &[f64]) -> std::result::Result<(), String> {
    let Some(step) = times.get(1).map(|t1| t1 - times[0]) else {
        return Ok(());
    };
    for (i, w) in times.windows(2).enumerate() {
        let d = w[1] - w[0];
        if !(d > 0.0) {
            return Err(format!("timestamps not strictly increasing at data row {}", i + 2));
        }
        if (d - step).abs() > SPACING_TOL * step.abs() {
            return Err(format!("uneven spacing (gap) at data row {}", i + 2));
        }
    }
    Ok(())
}

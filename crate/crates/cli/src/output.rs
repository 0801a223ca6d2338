//! Stable on-disk formats: CSV with one header row and numbers written to 12
//! significant digits.

use std::fmt::Write as _;
use std::path::Path;

use hardcopy::stats::{DegreeHistogram, DegreeMoment};
use serde::Serialize;

use crate::CliError;

/// `%.12g`: 12 significant digits, trailing zeros removed, scientific
/// notation outside `[1e-5, 1e12)`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Builds a CSV document row by row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Self { text: format!("{header}\n") }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, &self.text).map_err(|e| CliError::io(path, e))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable document");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn degrees_csv(hist: &DegreeHistogram) -> Csv {
    let mut csv = Csv::new("k,count,fraction");
    for (k, c) in hist.iter() {
        csv.row(&[k.to_string(), c.to_string(), fmt_num(hist.fraction(k))]);
    }
    csv
}

pub fn dk_empirical_csv(rows: &[DegreeMoment]) -> Csv {
    let mut csv = Csv::new("k,mean,stderr");
    for d in rows {
        csv.row(&[d.k.to_string(), fmt_num(d.mean), fmt_num(d.stderr)]);
    }
    csv
}

fn read_csv(path: &Path, header: &str) -> Result<Vec<Vec<String>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => {
            return Err(CliError::invalid(
                "input",
                format!("{}: expected header `{header}`, found `{}`", path.display(), other.unwrap_or("")),
            ))
        }
    }
    Ok(lines.filter(|l| !l.trim().is_empty()).map(|l| l.split(',').map(|f| f.trim().to_string()).collect()).collect())
}

fn field<T: std::str::FromStr>(path: &Path, row: &[String], i: usize) -> Result<T, CliError> {
    row.get(i)
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| CliError::invalid("input", format!("{}: malformed row `{}`", path.display(), row.join(","))))
}

/// Reads a `k,count,fraction` file back into a histogram.
pub fn read_degrees_csv(path: &Path) -> Result<DegreeHistogram, CliError> {
    let rows = read_csv(path, "k,count,fraction")?;
    let pairs = rows
        .iter()
        .map(|r| Ok((field::<u64>(path, r, 0)?, field::<u64>(path, r, 1)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(DegreeHistogram::from_counts(pairs))
}

/// Reads a `k,mean,stderr` file.
pub fn read_dk_empirical_csv(path: &Path) -> Result<Vec<DegreeMoment>, CliError> {
    let rows = read_csv(path, "k,mean,stderr")?;
    let mut out = rows
        .iter()
        .map(|r| Ok(DegreeMoment { k: field(path, r, 0)?, mean: field(path, r, 1)?, stderr: field(path, r, 2)? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    out.sort_by_key(|d| d.k);
    Ok(out)
}

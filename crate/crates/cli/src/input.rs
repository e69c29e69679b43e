//! Reading one-column numeric files.
//!
//! One value per line. `#` starts a comment, blank lines are skipped, and a
//! non-numeric first data line is taken as a CSV header.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub values: usize,
    pub header: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Column {
    pub values: Vec<f64>,
    pub digest: InputDigest,
}

pub fn parse_column(text: &str, path: &str) -> Result<(Vec<f64>, Option<String>)> {
    let mut values = Vec::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| CliError::Parse { path: path.to_string(), line: i + 1, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let field = match fields.as_slice() {
            [f] | [f, ""] => *f,
            _ => return Err(err(format!("expected one column, found {}", fields.len()))),
        };
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => return Err(err(format!("value {v} is not finite"))),
            Err(_) if values.is_empty() && header.is_none() => header = Some(field.to_string()),
            Err(_) => return Err(err(format!("cannot parse {field:?} as a number"))),
        }
    }
    Ok((values, header))
}

/// Reads a column and requires at least `min` values.
pub fn read_column(path: &str, min: usize) -> Result<Column> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input { path: path.to_string(), message: e.to_string() })?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Input { path: path.to_string(), message: format!("not UTF-8: {e}") })?;
    let (values, header) = parse_column(text, path)?;
    if values.len() < min {
        return Err(CliError::Input {
            path: path.to_string(),
            message: format!("need n \u{2265} {min} values, found {}", values.len()),
        });
    }
    let sha256 = format!("{:x}", Sha256::digest(&bytes));
    Ok(Column { digest: InputDigest { path: path.to_string(), sha256, values: values.len(), header }, values })
}

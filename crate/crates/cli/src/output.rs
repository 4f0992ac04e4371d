//! Output plumbing: format selection, float formatting at a configurable
//! precision, and CSV/JSON/plain-text writers.

use crate::CliError;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    /// Aligned human-readable table (where the command supports it).
    Text,
}

#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub format: Format,
    pub precision: usize,
    pub out: Option<PathBuf>,
}

impl OutputSpec {
    /// Format one float: fixed decimals at the configured precision, or
    /// 17 significant digits in machine mode (`--precision 17`).
    pub fn fmt(&self, v: f64) -> String {
        if self.precision >= 17 {
            format!("{v:.16e}")
        } else {
            format!("{v:.*}", self.precision)
        }
    }

    pub fn fmt_opt(&self, v: Option<f64>) -> String {
        v.map(|x| self.fmt(x)).unwrap_or_default()
    }

    /// Write the complete report body to the destination.
    pub fn write_all(&self, body: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => {
                let mut f = std::fs::File::create(path)?;
                f.write_all(body.as_bytes())?;
                Ok(())
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(body.as_bytes())?;
                Ok(())
            }
        }
    }
}

/// Assemble CSV from a header and formatted rows.
pub fn csv_body(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = String::new();
    s.push_str(&header.join(","));
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Serialize a report as pretty JSON (floats keep full round-trip
/// precision).
pub fn json_body<T: serde::Serialize>(report: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Io(format!("JSON serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Aligned text table: pads each column to its widest cell.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate().take(cols) {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut s = String::new();
    for (i, h) in header.iter().enumerate() {
        if i > 0 {
            s.push_str("  ");
        }
        s.push_str(&format!("{h:>w$}", w = widths[i]));
    }
    s.push('\n');
    for row in rows {
        for (i, cell) in row.iter().enumerate().take(cols) {
            if i > 0 {
                s.push_str("  ");
            }
            s.push_str(&format!("{cell:>w$}", w = widths[i]));
        }
        s.push('\n');
    }
    s
}

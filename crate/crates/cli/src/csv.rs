//! Minimal CSV emission: header row, comma separated, `.` decimal point and
//! 17 significant digits so every double round-trips.

use std::fmt::Write as _;
use std::path::Path;

/// Formats a double with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Quotes a field when it contains a separator, quote or line break.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let line = |cells: &[String]| cells.iter().map(|c| field(c)).collect::<Vec<_>>().join(",");
    writeln!(out, "{}", line(header)).unwrap();
    for r in rows {
        writeln!(out, "{}", line(r)).unwrap();
    }
    out
}

pub fn write(path: &Path, header: &[String], rows: &[Vec<String>]) -> std::io::Result<()> {
    std::fs::write(path, render(header, rows))
}

/// Reads a CSV written by [`render`] back into a header and numeric rows.
pub fn read_numeric(text: &str) -> Option<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines.next()?.split(',').map(str::to_string).collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| c.parse::<f64>().ok())
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Some((header, rows))
}

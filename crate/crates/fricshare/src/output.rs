//! Number formatting and tabular output.
//!
//! Machine formats (CSV, JSON) print the shortest decimal that parses back
//! to the same `f64`. Human tables round to four significant digits.

use std::fmt::Write as _;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

pub fn full(v: f64) -> String {
    format!("{v:?}")
}

/// Four significant digits, switching to exponent form outside
/// `[1e-3, 1e4)`.
pub fn sig4(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = format!("{v:.3e}");
    let rounded: f64 = exp.parse().expect("formatted float parses");
    let mag = rounded.abs().log10().floor() as i32;
    if (-3..4).contains(&mag) {
        let decimals = (3 - mag) as usize;
        format!("{rounded:.decimals$}")
    } else {
        exp.replace('e', "e+").replace("e+-", "e-")
    }
}

/// Right-aligned text table.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .zip(&width)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", parts.join("  "));
    };
    line(&mut out, &mut headers.iter().copied());
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    line(&mut out, &mut rule.iter().map(String::as_str));
    for row in rows {
        line(&mut out, &mut row.iter().map(String::as_str));
    }
    out
}

pub fn csv(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

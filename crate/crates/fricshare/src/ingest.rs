//! `period,entity,amount` loss files.

use std::io::Read;
use std::path::Path;

use fricshare_core::empirical::{IngestReport, LossRecord, LossTable};

use crate::error::{io_err, CliError, CliResult};

const HEADER: [&str; 3] = ["period", "entity", "amount"];

/// Parses loss records from CSV text. `origin` names the source in errors.
pub fn parse_records<R: Read>(reader: R, origin: &Path) -> CliResult<Vec<LossRecord>> {
    let row_err = |line: u64, message: String| CliError::Row {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| row_err(1, e.to_string()))?;
    let names: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    if names != HEADER {
        return Err(row_err(1, format!("expected header `period,entity,amount`, found `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_err(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 3 {
            return Err(row_err(line, format!("expected 3 fields, found {}", row.len())));
        }
        let amount: f64 = row[2]
            .parse()
            .map_err(|_| row_err(line, format!("amount `{}` is not a number", &row[2])))?;
        if !(amount.is_finite() && amount >= 0.0) {
            return Err(row_err(line, format!("amount must be finite and >= 0, got {}", &row[2])));
        }
        if row[0].is_empty() || row[1].is_empty() {
            return Err(row_err(line, "empty period or entity".into()));
        }
        records.push(LossRecord {
            period: row[0].to_string(),
            entity: row[1].to_string(),
            amount,
        });
    }
    Ok(records)
}

/// Reads and pivots a loss file.
pub fn ingest(path: &Path) -> CliResult<(LossTable, IngestReport)> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let records = parse_records(file, path)?;
    Ok(LossTable::from_records(&records)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<Vec<LossRecord>> {
        parse_records(text.as_bytes(), Path::new("mem.csv"))
    }

    #[test]
    fn round_trip_two_by_three() {
        let recs = parse("period,entity,amount\n1,A,1\n2,A,2\n3,A,3\n1,B,4\n2,B,5\n3,B,6\n").unwrap();
        let (t, r) = LossTable::from_records(&recs).unwrap();
        assert_eq!(t.losses, vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        assert!(r.dropped.is_empty());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("period,entity,amount\n1,A,1\n2,A,abc\n").unwrap_err();
        assert!(matches!(err, CliError::Row { line: 3, .. }), "{err}");
        let err = parse("period,entity,amount\n1,A,1\n2,A,-4\n").unwrap_err();
        assert!(matches!(err, CliError::Row { line: 3, .. }), "{err}");
        let err = parse("period,entity,amount\n1,A\n").unwrap_err();
        assert!(matches!(err, CliError::Row { line: 2, .. }), "{err}");
        let err = parse("when,who,much\n").unwrap_err();
        assert!(matches!(err, CliError::Row { line: 1, .. }), "{err}");
    }
}

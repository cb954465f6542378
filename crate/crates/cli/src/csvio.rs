//! CSV ingestion and the shared numeric formatting rules: comma separator,
//! '.' decimal point, LF line endings, and 17 significant digits for reals
//! so every value round-trips bit-exactly.

use std::fs;
use std::path::Path;

use uq_core::model::ObservationSample;

use crate::{CliError, Result};

/// Render a real with 17 significant digits (enough to reproduce the exact
/// f64 on re-parse).
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Read one numeric column from a CSV file. A header row is detected by
/// attempting to parse the first row's field; non-numeric rows anywhere
/// else are errors carrying their line number.
pub fn ingest_csv_column(path: &Path, column: usize) -> Result<ObservationSample> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read data file {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let field = line.split(',').nth(column).ok_or_else(|| {
            CliError::config(format!(
                "{}:{line_no}: row has no column {column}",
                path.display()
            ))
        })?;
        match field.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(CliError::config(format!(
                    "{}:{line_no}: non-finite value {v}",
                    path.display()
                )))
            }
            Err(_) if idx == 0 => continue, // header row
            Err(e) => {
                return Err(CliError::config(format!(
                    "{}:{line_no}: cannot parse {field:?} as a number: {e}",
                    path.display()
                )))
            }
        }
    }
    if values.is_empty() {
        return Err(CliError::config(format!(
            "{}: no numeric rows found",
            path.display()
        )));
    }
    Ok(ObservationSample::new(values))
}

/// Read a one-column data file (the `--data` flag and file data sources).
pub fn ingest_csv(path: &Path) -> Result<ObservationSample> {
    ingest_csv_column(path, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn plain_rows_are_read_in_order() {
        let f = write_temp("2\n4\n6\n");
        let sample = ingest_csv(f.path()).unwrap();
        assert_eq!(sample.values(), &[2.0, 4.0, 6.0]);
        assert_eq!(sample.n(), 3);
    }

    #[test]
    fn header_row_is_skipped() {
        let f = write_temp("discharge\n1.5\n2.5\n");
        let sample = ingest_csv(f.path()).unwrap();
        assert_eq!(sample.values(), &[1.5, 2.5]);
    }

    #[test]
    fn malformed_row_reports_its_line_number() {
        let f = write_temp("1.0\n2.0\noops\n");
        let err = ingest_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains(":3:"), "got: {err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let f = write_temp("1.0\ninf\n");
        let err = ingest_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("non-finite"), "got: {err}");
    }

    #[test]
    fn column_selection_reads_tables() {
        let f = write_temp("id,value\n0,1.25\n1,2.5\n");
        let sample = ingest_csv_column(f.path(), 1).unwrap();
        assert_eq!(sample.values(), &[1.25, 2.5]);
    }

    #[test]
    fn formatted_reals_round_trip_bit_exactly() {
        for x in [
            std::f64::consts::PI,
            7.1773462536293131,
            0.013,
            1.0 / 3.0,
            6.02e23,
            -1.8227e-9,
        ] {
            let text = fmt_real(x);
            let back: f64 = text.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} reprinted as {text}");
        }
    }
}

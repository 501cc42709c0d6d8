//! CSV serialization of labeled cohorts.
//!
//! Three row-aligned files: a feature file (header
//! `Weight,Age,Virion Count,Gender`) and two target files (header
//! `Severity`, one value per row), one for precise and one for noisy
//! severities. LF line endings, no quoting. Reals are written in Rust's
//! shortest round-trip decimal form, so write followed by read restores the
//! exact bit patterns.

use std::path::Path;

use super::{LabeledSample, PatientRecord, Sex};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub const X_HEADER: &str = "Weight,Age,Virion Count,Gender";
pub const Y_HEADER: &str = "Severity";

/// Conventional file names used by the CLI.
pub const X_FILE: &str = "x_data.csv";
pub const Y_PRECISE_FILE: &str = "y_data_precise.csv";
pub const Y_NOISY_FILE: &str = "y_data_variance.csv";

/// Writes the three cohort CSVs. Each file is written atomically.
pub fn write_dataset(
    samples: &[LabeledSample],
    x_path: &Path,
    y_precise_path: &Path,
    y_noisy_path: &Path,
) -> Result<()> {
    let mut x = String::with_capacity(32 + samples.len() * 40);
    let mut yp = String::with_capacity(16 + samples.len() * 22);
    let mut yn = String::with_capacity(16 + samples.len() * 22);
    x.push_str(X_HEADER);
    x.push('\n');
    yp.push_str(Y_HEADER);
    yp.push('\n');
    yn.push_str(Y_HEADER);
    yn.push('\n');
    for s in samples {
        let r = s.record();
        x.push_str(&format!(
            "{},{},{},{}\n",
            r.weight_kg(),
            r.age_months(),
            r.virion_count(),
            r.sex().code()
        ));
        yp.push_str(&format!("{}\n", s.severity_precise()));
        yn.push_str(&format!("{}\n", s.severity_noisy()));
    }
    write_atomic(x_path, x.as_bytes())?;
    write_atomic(y_precise_path, yp.as_bytes())?;
    write_atomic(y_noisy_path, yn.as_bytes())?;
    Ok(())
}

/// Reads a feature CSV into validated records.
pub fn read_features(path: &Path) -> Result<Vec<PatientRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == X_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                path,
                1,
                "header",
                format!("expected {X_HEADER:?}, got {header:?}"),
            ))
        }
        None => return Err(Error::parse(path, 1, "header", "empty file")),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                line_no,
                "row",
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let weight: f64 = parse_cell(path, line_no, "Weight", fields[0])?;
        let age: u64 = parse_cell(path, line_no, "Age", fields[1])?;
        let virion: u64 = parse_cell(path, line_no, "Virion Count", fields[2])?;
        let sex_code: u64 = parse_cell(path, line_no, "Gender", fields[3])?;
        let sex = Sex::from_code(sex_code)
            .map_err(|e| Error::parse(path, line_no, "Gender", e.to_string()))?;
        if age > u8::MAX as u64 {
            return Err(Error::parse(path, line_no, "Age", "age out of range 0..=24"));
        }
        let record = PatientRecord::new(age as u8, sex, weight, virion)
            .map_err(|e| Error::parse(path, line_no, "row", e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

/// Reads a target CSV (header `Severity`) into nonnegative values.
pub fn read_targets(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == Y_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                path,
                1,
                "header",
                format!("expected {Y_HEADER:?}, got {header:?}"),
            ))
        }
        None => return Err(Error::parse(path, 1, "header", "empty file")),
    }
    let mut targets = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let v: f64 = parse_cell(path, line_no, "Severity", line)?;
        if !v.is_finite() || v < 0.0 {
            return Err(Error::parse(
                path,
                line_no,
                "Severity",
                format!("severity must be finite and >= 0, got {v}"),
            ));
        }
        targets.push(v);
    }
    Ok(targets)
}

/// Reads and re-joins the three cohort CSVs; exact inverse of
/// [`write_dataset`] on round-trip values.
pub fn read_dataset(
    x_path: &Path,
    y_precise_path: &Path,
    y_noisy_path: &Path,
) -> Result<Vec<LabeledSample>> {
    let records = read_features(x_path)?;
    let precise = read_targets(y_precise_path)?;
    let noisy = read_targets(y_noisy_path)?;
    check_row_count(x_path, records.len(), y_precise_path, precise.len())?;
    check_row_count(x_path, records.len(), y_noisy_path, noisy.len())?;
    records
        .into_iter()
        .zip(precise.iter().zip(&noisy))
        .enumerate()
        .map(|(i, (record, (&p, &n)))| {
            LabeledSample::new(record, p, n)
                .map_err(|e| Error::parse(y_noisy_path, i + 2, "Severity", e.to_string()))
        })
        .collect()
}

fn check_row_count(
    x_path: &Path,
    x_rows: usize,
    y_path: &Path,
    y_rows: usize,
) -> Result<()> {
    if x_rows != y_rows {
        // Report against the line where the shorter file ran out of rows.
        return Err(Error::parse(
            y_path,
            x_rows.min(y_rows) + 2,
            "row count",
            format!(
                "{} has {} data rows but {} has {}",
                x_path.display(),
                x_rows,
                y_path.display(),
                y_rows
            ),
        ));
    }
    Ok(())
}

fn parse_cell<T: std::str::FromStr>(
    path: &Path,
    line_no: usize,
    column: &str,
    cell: &str,
) -> Result<T> {
    cell.parse().map_err(|_| {
        Error::parse(
            path,
            line_no,
            column,
            format!("cannot parse {cell:?} as a number"),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{generate, GenerationConfig};

    fn write_temp(dir: &tempfile::TempDir, name: &str, contents: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn round_trip_preserves_samples() {
        let dir = tempfile::tempdir().unwrap();
        let samples = generate(&GenerationConfig::new(100, 42).unwrap());
        let x = dir.path().join(X_FILE);
        let yp = dir.path().join(Y_PRECISE_FILE);
        let yn = dir.path().join(Y_NOISY_FILE);
        write_dataset(&samples, &x, &yp, &yn).unwrap();
        let back = read_dataset(&x, &yp, &yn).unwrap();
        assert_eq!(samples, back);
    }

    #[test]
    fn golden_first_rows_for_seed_42() {
        // Frozen serialization of the first two samples; guards both the
        // generator and the number formatting.
        let dir = tempfile::tempdir().unwrap();
        let samples = generate(&GenerationConfig::new(2, 42).unwrap());
        let x = dir.path().join(X_FILE);
        let yp = dir.path().join(Y_PRECISE_FILE);
        let yn = dir.path().join(Y_NOISY_FILE);
        write_dataset(&samples, &x, &yp, &yn).unwrap();
        assert_eq!(
            std::fs::read_to_string(&x).unwrap(),
            "Weight,Age,Virion Count,Gender\n\
             7.572195763520026,18,1599103929,0\n\
             0.4867861573151515,3,2786011303,0\n"
        );
        assert_eq!(
            std::fs::read_to_string(&yp).unwrap(),
            "Severity\n796850238455867500\n7171489372457718000\n"
        );
        assert_eq!(
            std::fs::read_to_string(&yn).unwrap(),
            "Severity\n796776614301796000\n7172017521205236000\n"
        );
    }

    #[test]
    fn rejects_wrong_x_header() {
        let dir = tempfile::tempdir().unwrap();
        let x = write_temp(&dir, "x.csv", "Weight,Age,Virions,Gender\n1,2,3,0\n");
        match read_features(&x).unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 1);
                assert_eq!(column, "header");
            }
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_numeric_cell_with_location() {
        let dir = tempfile::tempdir().unwrap();
        let x = write_temp(
            &dir,
            "x.csv",
            "Weight,Age,Virion Count,Gender\n5.0,2,10,0\n5.0,abc,10,1\n",
        );
        match read_features(&x).unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, "Age");
            }
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_field_count() {
        let dir = tempfile::tempdir().unwrap();
        let x = write_temp(&dir, "x.csv", "Weight,Age,Virion Count,Gender\n5.0,2,10\n");
        match read_features(&x).unwrap_err() {
            Error::Parse { line, column, reason, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, "row");
                assert!(reason.contains("expected 4 fields"));
            }
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_field_values() {
        let dir = tempfile::tempdir().unwrap();
        let x = write_temp(
            &dir,
            "x.csv",
            "Weight,Age,Virion Count,Gender\n5.0,30,10,0\n",
        );
        match read_features(&x).unwrap_err() {
            Error::Parse { line, column, reason, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, "row");
                assert!(reason.contains("age_months"));
            }
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn rejects_row_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let x = write_temp(
            &dir,
            "x.csv",
            "Weight,Age,Virion Count,Gender\n5.0,2,10,0\n6.0,3,20,1\n",
        );
        let yp = write_temp(&dir, "yp.csv", "Severity\n100\n200\n");
        let yn = write_temp(&dir, "yn.csv", "Severity\n100\n");
        match read_dataset(&x, &yp, &yn).unwrap_err() {
            Error::Parse { column, reason, .. } => {
                assert_eq!(column, "row count");
                assert!(reason.contains("2 data rows"));
            }
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_target() {
        let dir = tempfile::tempdir().unwrap();
        let y = write_temp(&dir, "y.csv", "Severity\n-1.0\n");
        match read_targets(&y).unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, "Severity");
            }
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = read_features(&dir.path().join("absent.csv")).unwrap_err();
        assert!(err.is_io());
    }
}

//! CSV ingestion and export.
//!
//! Files are UTF-8, comma-separated, with one header row naming the columns.
//! Decimal separator is `.` with no thousands grouping. The header may list
//! columns in any order and may contain extra columns; every schema feature
//! and the target must be present by exact name. Empty cells become NaN so
//! that rule-based cleaning can account for them; any other unparseable cell
//! is a hard error.

use std::path::Path;

use ndarray::{Array1, Array2};

use crate::dataset::{Dataset, Schema};
use crate::error::{Error, Result};

/// Read a dataset from `path`, mapping columns by schema name.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();

    let position = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::SchemaMismatch {
                column: name.to_string(),
                problem: "missing from CSV header".into(),
            })
    };
    let feature_cols: Vec<usize> = schema
        .features
        .iter()
        .map(|f| position(&f.name))
        .collect::<Result<_>>()?;
    let target_col = position(&schema.target.name)?;

    let parse = |cell: &str, row: usize, column: &str| -> Result<f64> {
        if cell.is_empty() {
            return Ok(f64::NAN);
        }
        cell.parse::<f64>().map_err(|e| Error::Parse {
            row,
            column: column.to_string(),
            message: format!("'{cell}': {e}"),
        })
    };

    let mut flat: Vec<f64> = Vec::new();
    let mut target: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // Data rows are 1-based below the header in error messages.
        let row_no = i + 2;
        let cell = |col: usize, name: &str| -> Result<f64> {
            let text = record.get(col).ok_or_else(|| Error::Parse {
                row: row_no,
                column: name.to_string(),
                message: "row has too few fields".into(),
            })?;
            parse(text, row_no, name)
        };
        for (j, &col) in feature_cols.iter().enumerate() {
            flat.push(cell(col, &schema.features[j].name)?);
        }
        target.push(cell(target_col, &schema.target.name)?);
    }

    let n = target.len();
    let rows = Array2::from_shape_vec((n, schema.width()), flat)
        .expect("row-major reshape matches parsed extents");
    Dataset::new(schema.clone(), rows, Array1::from_vec(target))
}

/// Write a dataset to `path` with features first, target last.
///
/// Floats use Rust's shortest round-trip formatting, so a write/read cycle
/// reproduces every value bit-for-bit.
pub fn save_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for f in &data.schema.features {
        out.push_str(&f.name);
        out.push(',');
    }
    out.push_str(&data.schema.target.name);
    out.push('\n');
    for i in 0..data.n_rows() {
        for j in 0..data.n_features() {
            out.push_str(&format_cell(data.rows[[i, j]]));
            out.push(',');
        }
        out.push_str(&format_cell(data.target[i]));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn format_cell(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureSpec;
    use ndarray::array;

    fn toy_schema() -> Schema {
        Schema::new(
            vec![
                FeatureSpec::new("a", "-", 0.0, 10.0),
                FeatureSpec::new("b", "kW", -5.0, 5.0),
            ],
            FeatureSpec::new("y", "t/h", 0.0, 100.0),
        )
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let file = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(file.path(), content).unwrap();
        file
    }

    #[test]
    fn loads_reordered_header_with_extra_column() {
        let file = write_temp("y,junk,b,a\n10.0,x,-1.5,3.0\n20.0,x,2.5,4.0\n");
        let data = load_csv(file.path(), &toy_schema()).unwrap();
        assert_eq!(data.rows, array![[3.0, -1.5], [4.0, 2.5]]);
        assert_eq!(data.target, array![10.0, 20.0]);
    }

    #[test]
    fn missing_column_is_schema_mismatch() {
        let file = write_temp("a,y\n1.0,2.0\n");
        let err = load_csv(file.path(), &toy_schema()).unwrap_err();
        match err {
            Error::SchemaMismatch { column, .. } => assert_eq!(column, "b"),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        let file = write_temp("a,b,y\n1.0,2.0,3.0\n1.0,oops,3.0\n");
        let err = load_csv(file.path(), &toy_schema()).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn empty_cell_becomes_nan() {
        let file = write_temp("a,b,y\n1.0,,3.0\n");
        let data = load_csv(file.path(), &toy_schema()).unwrap();
        assert!(data.rows[[0, 1]].is_nan());
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let original = Dataset::new(
            toy_schema(),
            array![[0.1, -0.7], [9.99999999999, 4.3e-13]],
            array![1.0 / 3.0, 99.5],
        )
        .unwrap();
        let file = tempfile::NamedTempFile::new().unwrap();
        save_csv(&original, file.path()).unwrap();
        let reloaded = load_csv(file.path(), &original.schema).unwrap();
        assert_eq!(original.rows, reloaded.rows);
        assert_eq!(original.target, reloaded.target);
    }
}

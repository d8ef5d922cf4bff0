//! Schema files: one CSV row per column with name, unit, bounds, and role.
//!
//! ```csv
//! name,unit,lower,upper,role
//! Mill weight,t,440.14,744.59,feature
//! Mill throughput,t/h,0.0,1616.99,target
//! ```
//!
//! Exactly one row must carry the `target` role.

use std::path::Path;

use anyhow::{bail, Context, Result};

use millopt_core::dataset::{FeatureSpec, Schema};

pub fn load_schema(path: &Path) -> Result<Schema> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening schema {}", path.display()))?;

    let header = reader.headers().context("reading schema header")?.clone();
    let expected = ["name", "unit", "lower", "upper", "role"];
    let actual: Vec<&str> = header.iter().collect();
    if actual != expected {
        bail!("schema header must be {expected:?}, got {actual:?}");
    }

    let mut features = Vec::new();
    let mut target = None;
    for (index, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("schema row {}", index + 1))?;
        let bound = |pos: usize, label: &str| -> Result<f64> {
            record[pos]
                .parse::<f64>()
                .with_context(|| format!("schema row {} ({}): bad {label}", index + 1, &record[0]))
        };
        let spec = FeatureSpec::new(&record[0], &record[1], bound(2, "lower")?, bound(3, "upper")?);
        match &record[4] {
            "feature" => features.push(spec),
            "target" => {
                if target.is_some() {
                    bail!("schema declares more than one target column");
                }
                target = Some(spec);
            }
            other => bail!(
                "schema row {} ({}): role must be \"feature\" or \"target\", got {other:?}",
                index + 1,
                &record[0]
            ),
        }
    }
    if features.is_empty() {
        bail!("schema declares no feature columns");
    }
    let Some(target) = target else {
        bail!("schema declares no target column");
    };
    Ok(Schema::new(features, target))
}

pub fn save_schema(schema: &Schema, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("creating schema {}", path.display()))?;
    writer.write_record(["name", "unit", "lower", "upper", "role"])?;
    for spec in &schema.features {
        writer.write_record([
            spec.name.as_str(),
            spec.unit.as_str(),
            &spec.lower.to_string(),
            &spec.upper.to_string(),
            "feature",
        ])?;
    }
    let target = &schema.target;
    writer.write_record([
        target.name.as_str(),
        target.unit.as_str(),
        &target.lower.to_string(),
        &target.upper.to_string(),
        "target",
    ])?;
    writer.flush().context("writing schema")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use millopt_core::dataset::synthetic::mill_schema;

    #[test]
    fn schema_round_trips_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("schema.csv");
        let schema = mill_schema();
        save_schema(&schema, &path).unwrap();
        let loaded = load_schema(&path).unwrap();
        assert_eq!(loaded.features.len(), schema.features.len());
        for (a, b) in loaded.features.iter().zip(&schema.features) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.unit, b.unit);
            assert_eq!(a.lower, b.lower);
            assert_eq!(a.upper, b.upper);
        }
        assert_eq!(loaded.target.name, schema.target.name);
    }

    #[test]
    fn malformed_schemas_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("schema.csv");

        std::fs::write(&path, "name,unit,lower,upper,role\na,,0,1,feature\n").unwrap();
        assert!(load_schema(&path).unwrap_err().to_string().contains("target"));

        std::fs::write(
            &path,
            "name,unit,lower,upper,role\na,,0,1,target\nb,,0,1,target\n",
        )
        .unwrap();
        assert!(load_schema(&path).is_err());

        std::fs::write(&path, "name,unit,lower,upper,role\na,,zero,1,feature\n").unwrap();
        assert!(load_schema(&path).is_err());

        std::fs::write(&path, "nome,unit,lower,upper,role\n").unwrap();
        assert!(load_schema(&path).is_err());
    }
}

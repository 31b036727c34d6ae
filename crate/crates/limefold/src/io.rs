//! File formats: CSV datasets, JSON schemas, models, discretization maps,
//! explanation streams and provenance sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use limefold_core::data::{DataError, DataRow, Dataset, FeatureKind, FeatureSpec, Schema};
use limefold_core::ilp::{FactSource, IlpError, IlpInstance};
use limefold_core::{DiscretizationMap, Explanation};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        source: serde_json::Error,
    },
    #[error("{context}: {source}")]
    Csv { context: String, source: csv::Error },
    #[error("{context}: {source}")]
    Data { context: String, source: DataError },
    #[error("{context}: missing column '{column}'")]
    MissingColumn { context: String, column: String },
    #[error("{context}: {source}")]
    Program { context: String, source: IlpError },
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.into(),
        source,
    })
}

/// Writes `contents`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<(), IoError> {
    let err = |source| IoError::Write {
        path: path.into(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(err)?;
    }
    fs::write(path, contents).map_err(err)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn from_json<T: DeserializeOwned>(text: &str, context: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|source| IoError::Json {
        context: context.into(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    from_json(&read_text(path)?, &path.display().to_string())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_text(path, &to_json(value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindTag {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FeatureEntry {
    name: String,
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<Vec<String>>,
}

/// The on-disk schema document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SchemaFile {
    features: Vec<FeatureEntry>,
    label: String,
    positive_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id_column: Option<String>,
}

pub fn parse_schema(text: &str, context: &str) -> Result<Schema, IoError> {
    let file: SchemaFile = from_json(text, context)?;
    let data_err = |source| IoError::Data {
        context: context.into(),
        source,
    };
    let features = file
        .features
        .into_iter()
        .map(|f| match (f.kind, f.domain) {
            (KindTag::Numeric, _) => Ok(FeatureSpec::numeric(f.name)),
            (KindTag::Categorical, Some(domain)) => Ok(FeatureSpec::categorical(f.name, domain)),
            (KindTag::Categorical, None) => Err(DataError::EmptyDomain(f.name)),
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(data_err)?;
    Schema::new(features, file.label, file.positive_label, file.id_column).map_err(data_err)
}

pub fn schema_to_json(schema: &Schema) -> String {
    let file = SchemaFile {
        features: schema
            .features()
            .iter()
            .map(|f| match &f.kind {
                FeatureKind::Numeric => FeatureEntry {
                    name: f.name.clone(),
                    kind: KindTag::Numeric,
                    domain: None,
                },
                FeatureKind::Categorical { domain } => FeatureEntry {
                    name: f.name.clone(),
                    kind: KindTag::Categorical,
                    domain: Some(domain.clone()),
                },
            })
            .collect(),
        label: schema.label_name().into(),
        positive_label: schema.positive_label().into(),
        id_column: schema.id_column().map(Into::into),
    };
    to_json(&file)
}

/// Parses a headed CSV against `schema`. Columns are matched by name, extra
/// columns are ignored. Without an id column rows are numbered from 0.
pub fn parse_csv(text: &str, schema: &Schema, context: &str) -> Result<Dataset, IoError> {
    let csv_err = |source| IoError::Csv {
        context: context.into(),
        source,
    };
    let data_err = |source| IoError::Data {
        context: context.into(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_err)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IoError::MissingColumn {
                context: context.into(),
                column: name.into(),
            })
    };
    let feature_cols = schema
        .features()
        .iter()
        .map(|f| column(&f.name))
        .collect::<Result<Vec<_>, _>>()?;
    let label_col = column(schema.label_name())?;
    let id_col = schema.id_column().map(column).transpose()?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = i + 1;
        if record.len() != headers.len() {
            return Err(data_err(DataError::Arity {
                row: line,
                expected: headers.len(),
                found: record.len(),
            }));
        }
        let values = feature_cols
            .iter()
            .enumerate()
            .map(|(f, &c)| schema.parse_cell(f, &record[c], line))
            .collect::<Result<Vec<_>, _>>()
            .map_err(data_err)?;
        let label = schema.parse_label(&record[label_col], line).map_err(data_err)?;
        let id = match id_col {
            Some(c) => schema.parse_id(&record[c], line).map_err(data_err)?,
            None => i as u64,
        };
        rows.push(DataRow { id, values, label });
    }
    Dataset::new(schema.clone(), rows).map_err(data_err)
}

pub fn load_dataset(csv_path: &Path, schema_path: &Path) -> Result<Dataset, IoError> {
    let schema = parse_schema(&read_text(schema_path)?, &schema_path.display().to_string())?;
    parse_csv(&read_text(csv_path)?, &schema, &csv_path.display().to_string())
}

pub fn read_discretization(path: &Path) -> Result<DiscretizationMap, IoError> {
    read_json(path)
}

/// One explanation per line.
pub fn explanations_to_jsonl(explanations: &[Explanation]) -> String {
    let mut out = String::new();
    for e in explanations {
        out.push_str(&serde_json::to_string(e).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl_explanations(text: &str, context: &str) -> Result<Vec<Explanation>, IoError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| from_json(l, &format!("{context}:{}", i + 1)))
        .collect()
}

pub fn parse_program(text: &str, context: &str) -> Result<IlpInstance, IoError> {
    limefold_core::ilp::parse_program(text).map_err(|source| IoError::Program {
        context: context.into(),
        source,
    })
}

pub fn read_provenance(path: &Path) -> Result<Vec<FactSource>, IoError> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use limefold_core::Value;

    const SCHEMA: &str = r#"{"features":[{"name":"a","kind":"numeric"},{"name":"b","kind":"categorical","domain":["x","y"]}],"label":"c","positive_label":"yes"}"#;

    #[test]
    fn schema_round_trip() {
        let s = parse_schema(SCHEMA, "s").unwrap();
        assert_eq!(parse_schema(&schema_to_json(&s), "s").unwrap(), s);
    }

    #[test]
    fn csv_by_column_name_with_missing() {
        let s = parse_schema(SCHEMA, "s").unwrap();
        let ds = parse_csv("c,b,a,extra\nyes,x,1.5,z\nno,,?,z\n", &s, "d").unwrap();
        assert_eq!(ds.rows()[0].values, vec![Value::Number(1.5), Value::Category(0)]);
        assert!(ds.rows()[0].label && !ds.rows()[1].label);
        assert_eq!(ds.rows()[1].values, vec![Value::Missing, Value::Missing]);
        assert_eq!(ds.rows()[1].id, 1);
    }

    #[test]
    fn csv_errors() {
        let s = parse_schema(SCHEMA, "s").unwrap();
        assert!(matches!(parse_csv("a,c\n1,yes\n", &s, "d"), Err(IoError::MissingColumn { .. })));
        let e = parse_csv("a,b,c\n1,z,yes\n", &s, "d").unwrap_err();
        assert!(e.to_string().contains("z"), "{e}");
        assert!(matches!(parse_csv("a,b,c\nfoo,x,yes\n", &s, "d"), Err(IoError::Data { .. })));
    }
}

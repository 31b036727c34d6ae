//! Typed tabular data: schemas, rows, and categorical binarization.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cell spellings treated as a missing value.
pub const MISSING_MARKERS: [&str; 3] = ["", "?", "NA"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("categorical feature `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("categorical feature `{feature}` lists category `{value}` twice")]
    DuplicateCategory { feature: String, value: String },
    #[error("label column `{0}` is also declared as a feature")]
    LabelIsFeature(String),
    #[error("row {row}: expected {expected} values, found {found}")]
    Arity {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate row id {0}")]
    DuplicateId(u64),
    #[error("row {row}, column `{column}`: cannot parse `{cell}` as a number")]
    MalformedNumber {
        row: usize,
        column: String,
        cell: String,
    },
    #[error("row {row}, column `{column}`: unknown category `{cell}`")]
    UnknownCategory {
        row: usize,
        column: String,
        cell: String,
    },
    #[error("row {row}, column `{column}`: `{cell}` is not a valid row id")]
    MalformedId {
        row: usize,
        column: String,
        cell: String,
    },
    #[error("row {row}: missing label")]
    MissingLabel { row: usize },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("feature `{0}` is not numeric")]
    NotNumeric(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureKind {
    Categorical { domain: Vec<String> },
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Numeric,
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        domain: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical {
                domain: domain.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, FeatureKind::Numeric)
    }

    pub fn domain(&self) -> Option<&[String]> {
        match &self.kind {
            FeatureKind::Categorical { domain } => Some(domain),
            FeatureKind::Numeric => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    features: Vec<FeatureSpec>,
    label_name: String,
    positive_label: String,
    id_column: Option<String>,
}

impl Schema {
    pub fn new(
        features: Vec<FeatureSpec>,
        label_name: impl Into<String>,
        positive_label: impl Into<String>,
        id_column: Option<String>,
    ) -> Result<Self, DataError> {
        let label_name = label_name.into();
        let mut seen = BTreeSet::new();
        for spec in &features {
            if !seen.insert(spec.name.as_str()) {
                return Err(DataError::DuplicateFeature(spec.name.clone()));
            }
            if let FeatureKind::Categorical { domain } = &spec.kind {
                if domain.is_empty() {
                    return Err(DataError::EmptyDomain(spec.name.clone()));
                }
                let mut values = BTreeSet::new();
                for v in domain {
                    if !values.insert(v.as_str()) {
                        return Err(DataError::DuplicateCategory {
                            feature: spec.name.clone(),
                            value: v.clone(),
                        });
                    }
                }
            }
        }
        if seen.contains(label_name.as_str()) {
            return Err(DataError::LabelIsFeature(label_name));
        }
        Ok(Self {
            features,
            label_name,
            positive_label: positive_label.into(),
            id_column,
        })
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &FeatureSpec {
        &self.features[index]
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn positive_label(&self) -> &str {
        &self.positive_label
    }

    pub fn id_column(&self) -> Option<&str> {
        self.id_column.as_deref()
    }

    /// Parses one cell of feature `index`. `row` is only used for error
    /// reporting (1-based data row).
    pub fn parse_cell(&self, index: usize, cell: &str, row: usize) -> Result<Value, DataError> {
        let cell = cell.trim();
        if MISSING_MARKERS.contains(&cell) {
            return Ok(Value::Missing);
        }
        let spec = &self.features[index];
        match &spec.kind {
            FeatureKind::Numeric => match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Value::Number(v)),
                _ => Err(DataError::MalformedNumber {
                    row,
                    column: spec.name.clone(),
                    cell: cell.to_string(),
                }),
            },
            FeatureKind::Categorical { domain } => domain
                .iter()
                .position(|d| d == cell)
                .map(Value::Category)
                .ok_or_else(|| DataError::UnknownCategory {
                    row,
                    column: spec.name.clone(),
                    cell: cell.to_string(),
                }),
        }
    }

    pub fn parse_label(&self, cell: &str, row: usize) -> Result<bool, DataError> {
        let cell = cell.trim();
        if MISSING_MARKERS.contains(&cell) {
            return Err(DataError::MissingLabel { row });
        }
        Ok(cell == self.positive_label)
    }

    pub fn parse_id(&self, cell: &str, row: usize) -> Result<u64, DataError> {
        cell.trim().parse().map_err(|_| DataError::MalformedId {
            row,
            column: self.id_column.clone().unwrap_or_default(),
            cell: cell.to_string(),
        })
    }

    /// Human-readable form of a value of feature `index`.
    pub fn display_value(&self, index: usize, value: &Value) -> String {
        match (value, &self.features[index].kind) {
            (Value::Missing, _) => "?".to_string(),
            (Value::Number(v), _) => format!("{v}"),
            (Value::Category(c), FeatureKind::Categorical { domain }) => domain[*c].clone(),
            (Value::Category(c), FeatureKind::Numeric) => format!("{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    /// Index into the feature's categorical domain.
    Category(usize),
    Number(f64),
    Missing,
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_category(&self) -> Option<usize> {
        match self {
            Value::Category(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRow {
    pub id: u64,
    pub values: Vec<Value>,
    /// `true` for the schema's positive label.
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    rows: Vec<DataRow>,
}

impl Dataset {
    pub fn new(schema: Schema, rows: Vec<DataRow>) -> Result<Self, DataError> {
        let mut ids = BTreeSet::new();
        for (i, row) in rows.iter().enumerate() {
            if row.values.len() != schema.features.len() {
                return Err(DataError::Arity {
                    row: i + 1,
                    expected: schema.features.len(),
                    found: row.values.len(),
                });
            }
            for (f, value) in row.values.iter().enumerate() {
                let ok = match (value, &schema.features[f].kind) {
                    (Value::Missing, _) => true,
                    (Value::Number(v), FeatureKind::Numeric) => v.is_finite(),
                    (Value::Category(c), FeatureKind::Categorical { domain }) => *c < domain.len(),
                    _ => false,
                };
                if !ok {
                    return Err(DataError::UnknownCategory {
                        row: i + 1,
                        column: schema.features[f].name.clone(),
                        cell: format!("{value:?}"),
                    });
                }
            }
            if !ids.insert(row.id) {
                return Err(DataError::DuplicateId(row.id));
            }
        }
        Ok(Self { schema, rows })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[DataRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Rows at `indices`, in that order, sharing this dataset's schema.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Row-major numeric matrix. Categories become their domain index and
    /// missing cells become NaN.
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                r.values
                    .iter()
                    .map(|v| match v {
                        Value::Number(x) => *x,
                        Value::Category(c) => *c as f64,
                        Value::Missing => f64::NAN,
                    })
                    .collect()
            })
            .collect()
    }
}

/// Where a binarized column comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnOrigin {
    Numeric { feature: usize },
    Indicator { feature: usize, category: usize },
}

impl ColumnOrigin {
    pub fn feature(&self) -> usize {
        match *self {
            ColumnOrigin::Numeric { feature } | ColumnOrigin::Indicator { feature, .. } => feature,
        }
    }
}

/// Mapping between a schema and its binarized column space: every
/// categorical feature `f` with domain `v1..vn` becomes `n` 0/1 columns
/// `f_v1..f_vn`, numeric features pass through.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binarization {
    columns: Vec<ColumnOrigin>,
    names: Vec<String>,
}

impl Binarization {
    pub fn for_schema(schema: &Schema) -> Self {
        let mut columns = Vec::new();
        let mut names = Vec::new();
        for (feature, spec) in schema.features().iter().enumerate() {
            match &spec.kind {
                FeatureKind::Numeric => {
                    columns.push(ColumnOrigin::Numeric { feature });
                    names.push(spec.name.clone());
                }
                FeatureKind::Categorical { domain } => {
                    for (category, value) in domain.iter().enumerate() {
                        columns.push(ColumnOrigin::Indicator { feature, category });
                        names.push(format!("{}_{}", spec.name, value));
                    }
                }
            }
        }
        Self { columns, names }
    }

    pub fn columns(&self) -> &[ColumnOrigin] {
        &self.columns
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Encodes one row. A missing categorical value sets all of its
    /// indicators to 0; a missing number becomes NaN.
    pub fn encode(&self, values: &[Value]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| match *col {
                ColumnOrigin::Numeric { feature } => values[feature].as_number().unwrap_or(f64::NAN),
                ColumnOrigin::Indicator { feature, category } => {
                    if values[feature] == Value::Category(category) {
                        1.0
                    } else {
                        0.0
                    }
                }
            })
            .collect()
    }

    /// Inverse of [`Binarization::encode`]. A categorical feature whose
    /// indicators are all zero decodes as missing.
    pub fn decode(&self, encoded: &[f64], feature_count: usize) -> Vec<Value> {
        let mut out = alloc::vec![Value::Missing; feature_count];
        for (col, &x) in self.columns.iter().zip(encoded) {
            match *col {
                ColumnOrigin::Numeric { feature } => {
                    if !x.is_nan() {
                        out[feature] = Value::Number(x);
                    }
                }
                ColumnOrigin::Indicator { feature, category } => {
                    if x == 1.0 {
                        out[feature] = Value::Category(category);
                    }
                }
            }
        }
        out
    }
}

/// Expands categorical features into 0/1 indicator columns. The returned
/// dataset is all-numeric; the [`Binarization`] maps columns back to their
/// source features.
pub fn binarize(dataset: &Dataset) -> (Dataset, Binarization) {
    let binarization = Binarization::for_schema(dataset.schema());
    let features = binarization
        .names()
        .iter()
        .map(|n| FeatureSpec::numeric(n.clone()))
        .collect();
    let schema = Schema {
        features,
        label_name: dataset.schema.label_name.clone(),
        positive_label: dataset.schema.positive_label.clone(),
        id_column: dataset.schema.id_column.clone(),
    };
    let rows = dataset
        .rows
        .iter()
        .map(|r| DataRow {
            id: r.id,
            values: binarization
                .encode(&r.values)
                .into_iter()
                .map(|x| if x.is_nan() { Value::Missing } else { Value::Number(x) })
                .collect(),
            label: r.label,
        })
        .collect();
    (Dataset { schema, rows }, binarization)
}

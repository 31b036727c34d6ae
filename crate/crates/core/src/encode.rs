//! The fitted encoding shared by the model, the explainer and the ILP
//! transform: a schema, its binarization and the discretization of its
//! numeric features.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{Binarization, ColumnOrigin, DataRow, Dataset, Schema, Value};
use crate::discretize::{discretize_all, DiscretizationMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    schema: Schema,
    binarization: Binarization,
    discretization: DiscretizationMap,
}

impl Encoding {
    pub fn new(schema: Schema, discretization: DiscretizationMap) -> Self {
        let binarization = Binarization::for_schema(&schema);
        Self {
            schema,
            binarization,
            discretization,
        }
    }

    /// Discretizes every numeric feature of `train` against its labels.
    pub fn fit(train: &Dataset) -> Self {
        Self::new(train.schema().clone(), discretize_all(train))
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn binarization(&self) -> &Binarization {
        &self.binarization
    }

    pub fn discretization(&self) -> &DiscretizationMap {
        &self.discretization
    }

    pub fn column_names(&self) -> Vec<alloc::string::String> {
        self.binarization.names().to_vec()
    }

    pub fn width(&self) -> usize {
        self.binarization.width()
    }

    pub fn model_row(&self, row: &DataRow) -> Vec<f64> {
        self.binarization.encode(&row.values)
    }

    pub fn matrix(&self, dataset: &Dataset) -> Vec<Vec<f64>> {
        dataset.rows().iter().map(|r| self.model_row(r)).collect()
    }

    pub fn cuts(&self, feature: usize) -> &[f64] {
        self.discretization
            .cuts(&self.schema.feature(feature).name)
            .unwrap_or(&[])
    }

    /// Interval index of a numeric value of `feature`; features without an
    /// entry in the map form a single interval.
    pub fn interval(&self, feature: usize, value: f64) -> Option<usize> {
        if value.is_nan() {
            return None;
        }
        Some(crate::discretize::interval_of(self.cuts(feature), value))
    }

    pub fn interval_bounds(&self, feature: usize, index: usize) -> (Option<f64>, Option<f64>) {
        let cuts = self.cuts(feature);
        let lower = index.checked_sub(1).and_then(|i| cuts.get(i).copied());
        (lower, cuts.get(index).copied())
    }

    /// Whether the source feature behind `column` has a value in `row`.
    pub fn column_known(&self, column: usize, row: &DataRow) -> bool {
        let origin: ColumnOrigin = self.binarization.columns()[column];
        !matches!(row.values[origin.feature()], Value::Missing)
    }
}

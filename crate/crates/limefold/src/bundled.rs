//! Datasets shipped inside the binary.

use limefold_core::{Dataset, Metrics};

use crate::io::{parse_csv, parse_schema, IoError};

#[derive(Debug, Clone, Copy)]
pub struct BundledDataset {
    pub name: &'static str,
    pub csv: &'static str,
    pub schema: &'static str,
    /// Reference scores, for comparison only.
    pub reference: Metrics,
}

pub const DATASETS: &[BundledDataset] = &[
    BundledDataset {
        name: "heart",
        csv: include_str!("../data/heart.csv"),
        schema: include_str!("../data/heart.schema.json"),
        reference: Metrics {
            precision: 0.82,
            recall: 0.74,
            accuracy: 0.82,
            f1: 0.78,
        },
    },
    BundledDataset {
        name: "breast-w",
        csv: include_str!("../data/breast-w.csv"),
        schema: include_str!("../data/breast-w.schema.json"),
        reference: Metrics {
            precision: 0.94,
            recall: 0.92,
            accuracy: 0.95,
            f1: 0.92,
        },
    },
    BundledDataset {
        name: "voting",
        csv: include_str!("../data/voting.csv"),
        schema: include_str!("../data/voting.schema.json"),
        reference: Metrics {
            precision: 0.98,
            recall: 0.96,
            accuracy: 0.97,
            f1: 0.97,
        },
    },
];

/// The penguin example: birds fly unless they are penguins.
pub const TWEETY: &str = include_str!("../data/tweety.pl");

pub fn names() -> Vec<&'static str> {
    DATASETS.iter().map(|d| d.name).collect()
}

pub fn find(name: &str) -> Option<&'static BundledDataset> {
    DATASETS.iter().find(|d| d.name == name)
}

impl BundledDataset {
    pub fn load(&self) -> Result<Dataset, IoError> {
        let schema = parse_schema(self.schema, self.name)?;
        parse_csv(self.csv, &schema, self.name)
    }
}

//! Core algorithms for explaining a boosted-tree classifier with a
//! default theory: a logic program made of default rules guarded by
//! negation-as-failure over invented abnormality predicates.
//!
//! The pipeline is
//!
//! 1. [`discretize`] numeric features with the Fayyad-Irani MDLP criterion and
//!    [`data::binarize`] categorical ones,
//! 2. train a [`gbt::GbtModel`] on the encoded matrix,
//! 3. explain each training row locally with [`lime::explain`],
//! 4. turn rows plus explanations into an [`ilp::IlpInstance`],
//! 5. induce a [`fold::Hypothesis`] with [`fold::fold`] and
//!    [`fold::prune_hypothesis`].
//!
//! [`pipeline`] wires these steps into one cross-validation fold and
//! [`eval`] scores the induced program on held-out rows.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel orchestration live in the `limefold` crate.

#![cfg_attr(not(test), no_std)]
#![warn(rust_2018_idioms)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod data;
pub mod discretize;
pub mod encode;
pub mod eval;
pub mod fold;
pub mod gbt;
pub mod ilp;
pub mod lime;
pub mod linalg;
pub mod logic;
pub mod pipeline;
pub mod rng;

pub use data::{DataError, DataRow, Dataset, FeatureKind, FeatureSpec, Schema, Value};
pub use discretize::DiscretizationMap;
pub use encode::Encoding;
pub use fold::{FoldParams, Hypothesis};
pub use gbt::{Classifier, GbtModel, GbtParams, Prediction};
pub use eval::{Metrics, Variant};
pub use ilp::IlpInstance;
pub use lime::{Explanation, LimeConfig};
pub use pipeline::{PipelineConfig, PipelineError};

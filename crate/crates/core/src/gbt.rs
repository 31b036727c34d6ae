//! Gradient-boosted regression trees for binary classification.
//!
//! Second-order boosting on the logistic loss with exact greedy split
//! enumeration. Each round fits one tree to the gradient/hessian statistics
//! of the current margins; a leaf scores `-G / (H + lambda)` and contributes
//! `learning_rate * score` to the margin.
//!
//! Sums over rows are always taken in a canonical order (by feature value,
//! then gradient, then hessian) so a trained model does not depend on the
//! order of training rows.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GbtError {
    #[error("training matrix is empty")]
    Empty,
    #[error("expected {expected} labels, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("row {row} has {found} features, expected {expected}")]
    Arity {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("all labels are {}; use a constant classifier instead", if *.0 { "positive" } else { "negative" })]
    SingleClass(bool),
    #[error("invalid parameter: {0}")]
    Param(&'static str),
}

/// Binary class decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Prediction {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Prediction {
    pub fn from_probability(p: f64, threshold: f64) -> Self {
        if p >= threshold {
            Prediction::Positive
        } else {
            Prediction::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Prediction::Positive
    }
}

/// Anything that scores an encoded row with a positive-class probability.
pub trait Classifier {
    fn probability(&self, row: &[f64]) -> f64;

    fn label(&self, row: &[f64]) -> Prediction {
        Prediction::from_probability(self.probability(row), 0.5)
    }
}

impl<F: Fn(&[f64]) -> f64> Classifier for F {
    fn probability(&self, row: &[f64]) -> f64 {
        self(row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_child_weight: f64,
    pub lambda: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            rounds: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_child_weight: 1.0,
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        /// Loss reduction achieved by this split.
        gain: f64,
        /// Hessian mass reaching the node.
        cover: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        score: f64,
    },
}

impl TreeNode {
    /// Leaf score for `row`. NaN goes left.
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { score } => return *score,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    let x = row[*feature];
                    node = if x.is_nan() || x < *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn visit_splits(&self, f: &mut impl FnMut(usize, f64)) {
        if let TreeNode::Split {
            feature,
            gain,
            left,
            right,
            ..
        } = self
        {
            f(*feature, *gain);
            left.visit_splits(f);
            right.visit_splits(f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub trees: Vec<TreeNode>,
    pub learning_rate: f64,
    /// Prior log-odds of the positive class.
    pub base_score: f64,
    pub feature_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub names: Vec<String>,
    pub gain: Vec<f64>,
    pub splits: Vec<usize>,
}

pub(crate) fn sigmoid(margin: f64) -> f64 {
    let m = margin.clamp(-35.0, 35.0);
    1.0 / (1.0 + libm::exp(-m))
}

/// Mean logistic loss of `margins` against `labels`.
pub fn logistic_loss(margins: &[f64], labels: &[bool]) -> f64 {
    let total: f64 = margins
        .iter()
        .zip(labels)
        .map(|(&m, &y)| {
            // log(1 + e^-m) for y = 1, log(1 + e^m) for y = 0, stably
            let z = if y { -m } else { m };
            if z > 0.0 {
                z + libm::log1p(libm::exp(-z))
            } else {
                libm::log1p(libm::exp(z))
            }
        })
        .sum();
    total / margins.len() as f64
}

impl GbtModel {
    pub fn train(
        matrix: &[Vec<f64>],
        labels: &[bool],
        feature_names: Vec<String>,
        params: &GbtParams,
    ) -> Result<Self, GbtError> {
        let n = matrix.len();
        if n == 0 {
            return Err(GbtError::Empty);
        }
        if labels.len() != n {
            return Err(GbtError::LabelCount {
                expected: n,
                found: labels.len(),
            });
        }
        let width = feature_names.len();
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != width {
                return Err(GbtError::Arity {
                    row,
                    expected: width,
                    found: r.len(),
                });
            }
        }
        if !(params.learning_rate > 0.0) {
            return Err(GbtError::Param("learning_rate must be positive"));
        }
        if !(params.lambda >= 0.0) || !(params.min_child_weight >= 0.0) {
            return Err(GbtError::Param("lambda and min_child_weight must be non-negative"));
        }
        let positives = labels.iter().filter(|&&y| y).count();
        if positives == 0 || positives == n {
            return Err(GbtError::SingleClass(positives == n));
        }
        let prior = positives as f64 / n as f64;
        let base_score = libm::log(prior / (1.0 - prior));

        let mut model = GbtModel {
            trees: Vec::with_capacity(params.rounds),
            learning_rate: params.learning_rate,
            base_score,
            feature_names,
        };
        let mut margins = vec![base_score; n];
        let all: Vec<usize> = (0..n).collect();
        for _ in 0..params.rounds {
            let stats: Vec<(f64, f64)> = margins
                .iter()
                .zip(labels)
                .map(|(&m, &y)| {
                    let p = sigmoid(m);
                    (p - if y { 1.0 } else { 0.0 }, p * (1.0 - p))
                })
                .collect();
            let builder = TreeBuilder {
                matrix,
                stats: &stats,
                params,
                width,
            };
            let tree = builder.build(&all, 0);
            for (m, row) in margins.iter_mut().zip(matrix) {
                *m += params.learning_rate * tree.score(row);
            }
            model.trees.push(tree);
        }
        Ok(model)
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.score(row)).sum::<f64>()
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<f64, GbtError> {
        self.check_arity(row)?;
        Ok(sigmoid(self.margin(row)))
    }

    /// Thresholded probability; a tie goes to the positive class.
    pub fn predict_label(&self, row: &[f64], threshold: f64) -> Result<Prediction, GbtError> {
        Ok(Prediction::from_probability(self.predict_proba(row)?, threshold))
    }

    fn check_arity(&self, row: &[f64]) -> Result<(), GbtError> {
        if row.len() != self.feature_names.len() {
            return Err(GbtError::Arity {
                row: 0,
                expected: self.feature_names.len(),
                found: row.len(),
            });
        }
        Ok(())
    }

    pub fn feature_importance(&self) -> FeatureImportance {
        let k = self.feature_names.len();
        let mut gain = vec![0.0; k];
        let mut splits = vec![0; k];
        for tree in &self.trees {
            tree.visit_splits(&mut |f, g| {
                gain[f] += g;
                splits[f] += 1;
            });
        }
        FeatureImportance {
            names: self.feature_names.clone(),
            gain,
            splits,
        }
    }
}

impl Classifier for GbtModel {
    fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }
}

struct TreeBuilder<'a> {
    matrix: &'a [Vec<f64>],
    stats: &'a [(f64, f64)],
    params: &'a GbtParams,
    width: usize,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn cmp_stats(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

impl TreeBuilder<'_> {
    fn canonical_sum(&self, rows: &[usize]) -> (f64, f64) {
        let mut s: Vec<(f64, f64)> = rows.iter().map(|&i| self.stats[i]).collect();
        s.sort_by(|a, b| cmp_stats(*a, *b));
        s.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1))
    }

    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.params.lambda)
    }

    fn build(&self, rows: &[usize], depth: usize) -> TreeNode {
        let (g, h) = self.canonical_sum(rows);
        let leaf = TreeNode::Leaf {
            score: -g / (h + self.params.lambda),
        };
        if depth >= self.params.max_depth || rows.len() < 2 {
            return leaf;
        }
        let Some(choice) = self.best_split(rows, g, h) else {
            return leaf;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| {
            let x = self.matrix[i][choice.feature];
            x.is_nan() || x < choice.threshold
        });
        TreeNode::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            gain: choice.gain,
            cover: h,
            left: Box::new(self.build(&left, depth + 1)),
            right: Box::new(self.build(&right, depth + 1)),
        }
    }

    fn best_split(&self, rows: &[usize], g: f64, h: f64) -> Option<SplitChoice> {
        let parent = self.score(g, h);
        let mcw = self.params.min_child_weight;
        let mut best: Option<SplitChoice> = None;
        let mut present: Vec<(f64, f64, f64)> = Vec::with_capacity(rows.len());
        let mut missing: Vec<usize> = Vec::new();
        for feature in 0..self.width {
            present.clear();
            missing.clear();
            for &i in rows {
                let x = self.matrix[i][feature];
                if x.is_nan() {
                    missing.push(i);
                } else {
                    let (gi, hi) = self.stats[i];
                    present.push((x, gi, hi));
                }
            }
            if present.len() < 2 {
                continue;
            }
            present.sort_by(|a, b| a.0.total_cmp(&b.0).then(cmp_stats((a.1, a.2), (b.1, b.2))));
            let (mut gl, mut hl) = self.canonical_sum(&missing);
            for k in 1..present.len() {
                gl += present[k - 1].1;
                hl += present[k - 1].2;
                if present[k - 1].0 == present[k].0 {
                    continue;
                }
                let (gr, hr) = (g - gl, h - hl);
                if hl < mcw || hr < mcw {
                    continue;
                }
                let gain = 0.5 * (self.score(gl, hl) + self.score(gr, hr) - parent);
                if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(SplitChoice {
                        feature,
                        threshold: crate::discretize::midpoint(present[k - 1].0, present[k].0),
                        gain,
                    });
                }
            }
        }
        best
    }
}

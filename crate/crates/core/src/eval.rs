//! Classification metrics and stratified cross-validation folds.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::fold::{Bits, FoldError, Hypothesis, Knowledge};
use crate::ilp::IlpInstance;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = Confusion::default();
        for (predicted, actual) in pairs {
            match (predicted, actual) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Metrics {
    pub fn from_confusion(c: &Confusion) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            accuracy: ratio(c.tp + c.tn, c.total()),
            f1,
        }
    }

    pub fn mean(items: &[Metrics]) -> Metrics {
        let n = items.len().max(1) as f64;
        let sum = |f: fn(&Metrics) -> f64| items.iter().map(f).sum::<f64>() / n;
        Metrics {
            precision: sum(|m| m.precision),
            recall: sum(|m| m.recall),
            accuracy: sum(|m| m.accuracy),
            f1: sum(|m| m.f1),
        }
    }
}

/// Confusion matrix of `hypothesis` on `test`, whose example labels are the
/// ground truth.
pub fn confusion(hypothesis: &Hypothesis, test: &IlpInstance) -> Result<Confusion, FoldError> {
    let examples = test.examples();
    let kb = Knowledge::new(&examples, &test.facts, &test.rules, &Default::default())?;
    let covered = kb.covers(hypothesis);
    let p = test.positives.len();
    Ok(Confusion::from_pairs(
        (0..examples.len()).map(|i| (covered.contains(i), i < p)),
    ))
}

pub fn score(hypothesis: &Hypothesis, test: &IlpInstance) -> Result<Metrics, FoldError> {
    Ok(Metrics::from_confusion(&confusion(hypothesis, test)?))
}

pub fn count_rules(hypothesis: &Hypothesis) -> usize {
    hypothesis.rule_count()
}

pub fn count_facts(hypothesis: &Hypothesis) -> usize {
    hypothesis.fact_count()
}

/// Coverage of a hypothesis on its own training examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingFit {
    pub positives: usize,
    pub covered_positives: usize,
    pub negatives: usize,
    pub covered_negatives: usize,
}

impl TrainingFit {
    pub fn measure(kb: &Knowledge, hypothesis: &Hypothesis, positives: &Bits, negatives: &Bits) -> Self {
        let covered = kb.covers(hypothesis);
        Self {
            positives: positives.count(),
            covered_positives: covered.intersection_count(positives),
            negatives: negatives.count(),
            covered_negatives: covered.intersection_count(negatives),
        }
    }

    /// Every positive and no negative covered.
    pub fn is_exact(&self) -> bool {
        self.covered_positives == self.positives && self.covered_negatives == 0
    }
}

/// Assigns rows to `k` folds so each fold receives an even share of each
/// class. Returns the test row indices of every fold, ascending.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Vec<Vec<usize>> {
    let k = k.max(1);
    let mut folds = alloc::vec![Vec::new(); k];
    let mut rng = rng::stream(seed, "folds", 0);
    let mut next = 0;
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Which learner a cross-validation run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// FOLD on the explanation-derived instance labelled by the model.
    LimeFold,
    /// FOLD on the full encoding labelled by the data.
    Fold,
    /// FOIL on the full encoding labelled by the data.
    Foil,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::LimeFold, Variant::Fold, Variant::Foil];

    pub fn name(self) -> &'static str {
        match self {
            Variant::LimeFold => "lime-fold",
            Variant::Fold => "fold",
            Variant::Foil => "foil",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub metrics: Metrics,
    pub confusion: Confusion,
    pub rules: usize,
    pub facts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub dataset: String,
    pub variant: Variant,
    pub folds: Vec<FoldOutcome>,
    pub mean: Metrics,
    pub mean_rules: f64,
    pub mean_facts: f64,
}

impl CvReport {
    pub fn new(dataset: impl Into<String>, variant: Variant, mut folds: Vec<FoldOutcome>) -> Self {
        folds.sort_by_key(|f| f.fold);
        let metrics: Vec<Metrics> = folds.iter().map(|f| f.metrics).collect();
        let n = folds.len().max(1) as f64;
        Self {
            dataset: dataset.into(),
            variant,
            mean: Metrics::mean(&metrics),
            mean_rules: folds.iter().map(|f| f.rules as f64).sum::<f64>() / n,
            mean_facts: folds.iter().map(|f| f.facts as f64).sum::<f64>() / n,
            folds,
        }
    }
}

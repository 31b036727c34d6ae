//! Supervised discretization of numeric features (Fayyad-Irani MDLP).
//!
//! Cut points split the real line into left-closed intervals
//! `(-inf, c1), [c1, c2), ..., [ck, +inf)`, indexed from 0.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{DataError, Dataset};

/// Per numeric feature, the strictly increasing list of cut points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscretizationMap {
    cuts: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cut points for `{0}` must be finite and strictly increasing")]
pub struct InvalidCuts(pub String);

impl DiscretizationMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, feature: impl Into<String>, cuts: Vec<f64>) -> Result<(), InvalidCuts> {
        let feature = feature.into();
        let ok = cuts.iter().all(|c| c.is_finite()) && cuts.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(InvalidCuts(feature));
        }
        self.cuts.insert(feature, cuts);
        Ok(())
    }

    pub fn cuts(&self, feature: &str) -> Option<&[f64]> {
        self.cuts.get(feature).map(Vec::as_slice)
    }

    pub fn features(&self) -> impl Iterator<Item = &str> {
        self.cuts.keys().map(String::as_str)
    }

    /// Index of the interval containing `value`, or `None` when the feature
    /// has no entry or the value is NaN.
    pub fn interval_index(&self, feature: &str, value: f64) -> Option<usize> {
        if value.is_nan() {
            return None;
        }
        self.cuts(feature).map(|cuts| interval_of(cuts, value))
    }

    /// Number of intervals for `feature` (cuts + 1).
    pub fn interval_count(&self, feature: &str) -> Option<usize> {
        self.cuts(feature).map(|c| c.len() + 1)
    }

    /// Bounds of interval `index`; `None` stands for an infinite end.
    pub fn interval_bounds(&self, feature: &str, index: usize) -> Option<(Option<f64>, Option<f64>)> {
        let cuts = self.cuts(feature)?;
        if index > cuts.len() {
            return None;
        }
        let lower = index.checked_sub(1).map(|i| cuts[i]);
        let upper = cuts.get(index).copied();
        Some((lower, upper))
    }
}

/// Interval index of `value` given sorted cut points: the number of cuts
/// that are `<= value`.
pub fn interval_of(cuts: &[f64], value: f64) -> usize {
    cuts.partition_point(|&c| c <= value)
}

/// Class entropy in bits of a two-class sample with the given counts.
pub(crate) fn entropy(neg: usize, pos: usize) -> f64 {
    let n = (neg + pos) as f64;
    let mut h = 0.0;
    for c in [neg, pos] {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * libm::log2(p);
        }
    }
    h
}

/// Entropies closer than this count as a tie.
const TIE: f64 = 1e-12;

fn classes(neg: usize, pos: usize) -> u32 {
    (neg > 0) as u32 + (pos > 0) as u32
}

/// MDLP cut points for `(value, label)` pairs. Input order does not matter.
pub fn mdl_cut_points(samples: &[(f64, bool)]) -> Vec<f64> {
    let mut sorted: Vec<(f64, bool)> = samples.iter().copied().filter(|(v, _)| !v.is_nan()).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut cuts = Vec::new();
    split(&sorted, &mut cuts);
    cuts
}

fn split(s: &[(f64, bool)], cuts: &mut Vec<f64>) {
    let n = s.len();
    if n < 2 {
        return;
    }
    let total_pos = s.iter().filter(|x| x.1).count();
    let total_neg = n - total_pos;

    // (boundary index, weighted entropy, left neg, left pos)
    let mut best: Option<(usize, f64, usize, usize)> = None;
    let (mut lneg, mut lpos) = (0usize, 0usize);
    for i in 1..n {
        if s[i - 1].1 {
            lpos += 1;
        } else {
            lneg += 1;
        }
        if s[i - 1].0 == s[i].0 {
            continue;
        }
        let (rneg, rpos) = (total_neg - lneg, total_pos - lpos);
        let e = (i as f64 / n as f64) * entropy(lneg, lpos)
            + ((n - i) as f64 / n as f64) * entropy(rneg, rpos);
        // equal entropies may differ in the last bits; keep the leftmost
        if best.is_none_or(|b| e < b.1 - TIE) {
            best = Some((i, e, lneg, lpos));
        }
    }
    let Some((i, e, lneg, lpos)) = best else {
        return;
    };
    let (rneg, rpos) = (total_neg - lneg, total_pos - lpos);
    let ent = entropy(total_neg, total_pos);
    let (ent1, ent2) = (entropy(lneg, lpos), entropy(rneg, rpos));
    let (k, k1, k2) = (
        classes(total_neg, total_pos) as f64,
        classes(lneg, lpos) as f64,
        classes(rneg, rpos) as f64,
    );
    let gain = ent - e;
    let delta = libm::log2(libm::pow(3.0, k) - 2.0) - (k * ent - k1 * ent1 - k2 * ent2);
    let threshold = (libm::log2((n - 1) as f64) + delta) / n as f64;
    if gain > threshold {
        split(&s[..i], cuts);
        cuts.push(midpoint(s[i - 1].0, s[i].0));
        split(&s[i..], cuts);
    }
}

/// Midpoint of two distinct adjacent values.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m > lo {
        m
    } else {
        hi
    }
}

/// MDLP cut points for one numeric feature, using the dataset's labels.
pub fn mdl_discretize(dataset: &Dataset, feature: &str) -> Result<Vec<f64>, DataError> {
    let index = dataset
        .schema()
        .feature_index(feature)
        .ok_or_else(|| DataError::UnknownFeature(feature.into()))?;
    if !dataset.schema().feature(index).is_numeric() {
        return Err(DataError::NotNumeric(feature.into()));
    }
    let samples: Vec<(f64, bool)> = dataset
        .rows()
        .iter()
        .filter_map(|r| r.values[index].as_number().map(|v| (v, r.label)))
        .collect();
    Ok(mdl_cut_points(&samples))
}

/// Discretizes every numeric feature of `dataset`.
pub fn discretize_all(dataset: &Dataset) -> DiscretizationMap {
    let mut map = DiscretizationMap::new();
    for spec in dataset.schema().features() {
        if spec.is_numeric() {
            let cuts = mdl_discretize(dataset, &spec.name).expect("numeric feature");
            map.insert(spec.name.clone(), cuts).expect("MDLP cuts are increasing");
        }
    }
    map
}

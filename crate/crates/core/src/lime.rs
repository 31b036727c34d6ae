//! Local surrogate explanations of single classifier decisions.
//!
//! Every binarized column is one interpretable feature: a categorical
//! indicator `f_v`, or a numeric feature viewed as "inside the same
//! discretization interval as the explained row". Perturbed samples are
//! drawn around the row, weighted by an exponential kernel on their distance
//! in interpretable space, and a weighted ridge regression of the
//! classifier's positive-class probability on the interpretable vector gives
//! the explanation weights.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ColumnOrigin, DataRow, Dataset, Value};
use crate::encode::Encoding;
use crate::gbt::{Classifier, Prediction};
use crate::linalg::{LinalgError, NormalEquations};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimeError {
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Regression(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimeConfig {
    /// Number of perturbed samples, the explained row included.
    pub samples: usize,
    /// Maximum number of conditions in an explanation.
    pub explanation_len: usize,
    /// Kernel width; `None` means `0.75 * sqrt(d)`.
    pub kernel_width: Option<f64>,
    /// Probability that a feature is resampled.
    pub perturb_probability: f64,
    pub ridge: f64,
    pub seed: u64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        Self {
            samples: 5000,
            explanation_len: 8,
            kernel_width: None,
            perturb_probability: 0.5,
            ridge: 1e-3,
            seed: 0,
        }
    }
}

impl LimeConfig {
    pub fn validate(&self) -> Result<(), LimeError> {
        if self.explanation_len < 1 || self.samples < self.explanation_len {
            return Err(LimeError::Config("need samples >= explanation_len >= 1"));
        }
        if !(0.0..=1.0).contains(&self.perturb_probability) {
            return Err(LimeError::Config("perturb_probability must lie in [0, 1]"));
        }
        if !(self.ridge >= 0.0) {
            return Err(LimeError::Config("ridge must be non-negative"));
        }
        if matches!(self.kernel_width, Some(w) if !(w > 0.0)) {
            return Err(LimeError::Config("kernel_width must be positive"));
        }
        Ok(())
    }

    pub fn width_for(&self, d: usize) -> f64 {
        self.kernel_width
            .unwrap_or_else(|| 0.75 * libm::sqrt(d.max(1) as f64))
    }
}

/// A feature condition that held for the explained row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    /// `f_v = 1` when `present`, `f_v = 0` otherwise.
    Indicator {
        feature: String,
        category: String,
        present: bool,
    },
    /// Numeric value inside interval `index`, `[lower, upper)`.
    Interval {
        feature: String,
        index: usize,
        lower: Option<f64>,
        upper: Option<f64>,
    },
}

impl Condition {
    pub fn feature(&self) -> &str {
        match self {
            Condition::Indicator { feature, .. } | Condition::Interval { feature, .. } => feature,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Indicator {
                feature,
                category,
                present,
            } => write!(f, "{feature}_{category} = {}", *present as u8),
            Condition::Interval {
                feature,
                lower,
                upper,
                ..
            } => {
                let lo = lower.map_or(String::from("(-inf"), |v| format!("[{v}"));
                let hi = upper.map_or(String::from("+inf)"), |v| format!("{v})"));
                write!(f, "{feature} in {lo}, {hi}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedCondition {
    pub condition: Condition,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    #[serde(rename = "id")]
    pub sample_id: u64,
    /// The classifier's decision on the explained row.
    pub label: Prediction,
    /// Sorted by descending `|weight|`.
    pub pairs: Vec<WeightedCondition>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct IntervalSample {
    count: usize,
    min: f64,
    max: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Perturbable {
    Indicator { p_one: f64 },
    Numeric { feature: usize, intervals: Vec<Option<IntervalSample>> },
}

/// Per-column sampling distributions estimated on the training split.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationModel {
    columns: Vec<Perturbable>,
    cuts: Vec<Vec<f64>>,
}

impl PerturbationModel {
    pub fn fit(encoding: &Encoding, train: &Dataset) -> Self {
        let mut columns = Vec::with_capacity(encoding.width());
        let mut cuts = Vec::with_capacity(encoding.width());
        for origin in encoding.binarization().columns() {
            match *origin {
                ColumnOrigin::Indicator { feature, category } => {
                    let known: Vec<usize> = train
                        .rows()
                        .iter()
                        .filter_map(|r| r.values[feature].as_category())
                        .collect();
                    let ones = known.iter().filter(|&&c| c == category).count();
                    let p_one = if known.is_empty() {
                        0.0
                    } else {
                        ones as f64 / known.len() as f64
                    };
                    columns.push(Perturbable::Indicator { p_one });
                    cuts.push(Vec::new());
                }
                ColumnOrigin::Numeric { feature } => {
                    let feature_cuts = encoding.cuts(feature).to_vec();
                    let mut intervals: Vec<Option<IntervalSample>> =
                        alloc::vec![None; feature_cuts.len() + 1];
                    for v in train.rows().iter().filter_map(|r| r.values[feature].as_number()) {
                        let i = crate::discretize::interval_of(&feature_cuts, v);
                        let slot = intervals[i].get_or_insert(IntervalSample {
                            count: 0,
                            min: v,
                            max: v,
                        });
                        slot.count += 1;
                        slot.min = slot.min.min(v);
                        slot.max = slot.max.max(v);
                    }
                    columns.push(Perturbable::Numeric { feature, intervals });
                    cuts.push(feature_cuts);
                }
            }
        }
        Self { columns, cuts }
    }

    pub fn dimension(&self) -> usize {
        self.columns.len()
    }
}

/// One point of the local neighbourhood.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedSample {
    /// Encoded row handed to the classifier.
    pub row: Vec<f64>,
    /// 1 where the perturbed column agrees with the explained row.
    pub interpretable: Vec<u8>,
    pub probability: f64,
    pub weight: f64,
}

/// Draws one neighbour of the encoded row `x`. Every column is resampled
/// independently with probability `p`: an indicator from its training
/// frequency, a numeric feature by first drawing an interval from the
/// training interval frequencies and then a uniform value within the
/// training range of that interval.
pub fn sample_around<R: Rng + ?Sized>(
    x: &[f64],
    model: &PerturbationModel,
    p: f64,
    rng: &mut R,
) -> PerturbedSample {
    let mut row = x.to_vec();
    let mut interpretable = alloc::vec![1u8; x.len()];
    for (j, column) in model.columns.iter().enumerate() {
        let resample = rng.gen::<f64>() < p;
        if !resample {
            continue;
        }
        match column {
            Perturbable::Indicator { p_one } => {
                let v = if rng.gen::<f64>() < *p_one { 1.0 } else { 0.0 };
                row[j] = v;
                interpretable[j] = (v == x[j]) as u8;
            }
            Perturbable::Numeric { intervals, .. } => {
                let total: usize = intervals.iter().flatten().map(|s| s.count).sum();
                if total == 0 {
                    continue;
                }
                let mut pick = rng.gen_range(0..total);
                let (index, sample) = intervals
                    .iter()
                    .enumerate()
                    .filter_map(|(i, s)| s.map(|s| (i, s)))
                    .find(|(_, s)| {
                        if pick < s.count {
                            true
                        } else {
                            pick -= s.count;
                            false
                        }
                    })
                    .expect("pick < total");
                let u: f64 = rng.gen();
                let v = sample.min + u * (sample.max - sample.min);
                row[j] = v;
                let original = if x[j].is_nan() {
                    None
                } else {
                    Some(crate::discretize::interval_of(&model.cuts[j], x[j]))
                };
                interpretable[j] = (original == Some(index)) as u8;
            }
        }
    }
    PerturbedSample {
        row,
        interpretable,
        probability: 0.0,
        weight: 1.0,
    }
}

/// Exponential kernel `exp(-D^2 / width^2)` where `D` is the Euclidean
/// distance between `interpretable` and the all-ones vector.
pub fn kernel_pi(interpretable: &[u8], width: f64) -> f64 {
    let d2 = interpretable.iter().filter(|&&b| b == 0).count() as f64;
    libm::exp(-d2 / (width * width))
}

/// Draws the neighbourhood of `row` and scores it with `classifier`.
pub fn neighbourhood<C: Classifier + ?Sized>(
    classifier: &C,
    encoding: &Encoding,
    perturbation: &PerturbationModel,
    row: &DataRow,
    config: &LimeConfig,
) -> Vec<PerturbedSample> {
    let x = encoding.model_row(row);
    let width = config.width_for(x.len());
    let mut rng = rng::stream(config.seed, "lime", row.id);
    let mut out = Vec::with_capacity(config.samples);
    for i in 0..config.samples {
        let mut s = if i == 0 {
            PerturbedSample {
                row: x.clone(),
                interpretable: alloc::vec![1; x.len()],
                probability: 0.0,
                weight: 1.0,
            }
        } else {
            sample_around(&x, perturbation, config.perturb_probability, &mut rng)
        };
        s.probability = classifier.probability(&s.row);
        s.weight = kernel_pi(&s.interpretable, width);
        out.push(s);
    }
    out
}

/// Fits the weighted ridge regression of probability on the interpretable
/// vector. Returns `(intercept, weights)`.
pub fn fit_local_model(samples: &[PerturbedSample], ridge: f64) -> Result<(f64, Vec<f64>), LimeError> {
    let d = samples.first().map_or(0, |s| s.interpretable.len());
    let mut ne = NormalEquations::new(d);
    let mut x = alloc::vec![0.0; d];
    for s in samples {
        for (xi, &b) in x.iter_mut().zip(&s.interpretable) {
            *xi = b as f64;
        }
        ne.add(&x, s.probability, s.weight);
    }
    Ok(ne.solve(ridge)?)
}

/// Explains the classifier's decision on `row` with at most
/// `config.explanation_len` weighted conditions.
pub fn explain<C: Classifier + ?Sized>(
    classifier: &C,
    encoding: &Encoding,
    perturbation: &PerturbationModel,
    row: &DataRow,
    config: &LimeConfig,
) -> Result<Explanation, LimeError> {
    config.validate()?;
    let samples = neighbourhood(classifier, encoding, perturbation, row, config);
    let (_, weights) = fit_local_model(&samples, config.ridge)?;
    let label = Prediction::from_probability(samples[0].probability, 0.5);

    let mut ranked: Vec<usize> = (0..weights.len())
        .filter(|&j| encoding.column_known(j, row))
        .collect();
    ranked.sort_by(|&a, &b| weights[b].abs().total_cmp(&weights[a].abs()).then(a.cmp(&b)));
    ranked.truncate(config.explanation_len);

    let x = encoding.model_row(row);
    let schema = encoding.schema();
    let pairs = ranked
        .into_iter()
        .map(|j| {
            let condition = match encoding.binarization().columns()[j] {
                ColumnOrigin::Indicator { feature, category } => {
                    let spec = schema.feature(feature);
                    Condition::Indicator {
                        feature: spec.name.clone(),
                        category: spec.domain().expect("categorical")[category].clone(),
                        present: x[j] == 1.0,
                    }
                }
                ColumnOrigin::Numeric { feature } => {
                    let value = match row.values[feature] {
                        Value::Number(v) => v,
                        _ => unreachable!("missing columns are filtered"),
                    };
                    let index = encoding.interval(feature, value).expect("finite value");
                    let (lower, upper) = encoding.interval_bounds(feature, index);
                    Condition::Interval {
                        feature: schema.feature(feature).name.clone(),
                        index,
                        lower,
                        upper,
                    }
                }
            };
            WeightedCondition {
                condition,
                weight: weights[j],
            }
        })
        .collect();
    Ok(Explanation {
        sample_id: row.id,
        label,
        pairs,
    })
}

/// Explains every row of `rows` serially.
pub fn explain_all<C: Classifier + ?Sized>(
    classifier: &C,
    encoding: &Encoding,
    perturbation: &PerturbationModel,
    rows: &[DataRow],
    config: &LimeConfig,
) -> Result<Vec<Explanation>, LimeError> {
    rows.iter()
        .map(|r| explain(classifier, encoding, perturbation, r, config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureSpec, Schema};
    use crate::discretize::DiscretizationMap;
    use alloc::vec;
    use rand::SeedableRng;

    fn toy() -> (Encoding, Dataset) {
        let schema = Schema::new(
            vec![
                FeatureSpec::categorical("color", ["red", "blue"]),
                FeatureSpec::numeric("size"),
                FeatureSpec::categorical("const", ["k"]),
            ],
            "y",
            "1",
            None,
        )
        .unwrap();
        let rows: Vec<DataRow> = (0..40)
            .map(|i| DataRow {
                id: i,
                values: vec![
                    Value::Category((i % 2) as usize),
                    Value::Number(i as f64),
                    Value::Category(0),
                ],
                label: i >= 20,
            })
            .collect();
        let ds = Dataset::new(schema.clone(), rows).unwrap();
        let mut map = DiscretizationMap::new();
        map.insert("size", vec![19.5]).unwrap();
        (Encoding::new(schema, map), ds)
    }

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_pi(&[1, 1, 1], 1.0), 1.0);
        let all_off = [0u8; 9];
        assert!((kernel_pi(&all_off, 3.0) - libm::exp(-1.0)).abs() < 1e-15);
        assert!((kernel_pi(&[0, 1, 0, 1], 1.0) - 0.1353352832366127).abs() < 1e-12);
        assert!(kernel_pi(&[0, 1, 1, 1], 1.0) > kernel_pi(&[0, 0, 1, 1], 1.0));
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let (enc, ds) = toy();
        let pm = PerturbationModel::fit(&enc, &ds);
        let x = enc.model_row(&ds.rows()[3]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let s = sample_around(&x, &pm, 0.0, &mut rng);
            assert_eq!(s.row, x);
            assert!(s.interpretable.iter().all(|&b| b == 1));
            assert_eq!(kernel_pi(&s.interpretable, 1.0), 1.0);
        }
    }

    #[test]
    fn degenerate_column_never_changes() {
        let (enc, ds) = toy();
        let pm = PerturbationModel::fit(&enc, &ds);
        let x = enc.model_row(&ds.rows()[3]);
        let k = enc.width() - 1;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let s = sample_around(&x, &pm, 1.0, &mut rng);
            assert_eq!(s.row[k], 1.0);
            assert_eq!(s.interpretable[k], 1);
        }
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let (enc, ds) = toy();
        let pm = PerturbationModel::fit(&enc, &ds);
        let x = enc.model_row(&ds.rows()[5]);
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            assert_eq!(sample_around(&x, &pm, 0.5, &mut a), sample_around(&x, &pm, 0.5, &mut b));
        }
    }

    #[test]
    fn numeric_samples_stay_in_training_range() {
        let (enc, ds) = toy();
        let pm = PerturbationModel::fit(&enc, &ds);
        let x = enc.model_row(&ds.rows()[5]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let s = sample_around(&x, &pm, 1.0, &mut rng);
            assert!((0.0..=39.0).contains(&s.row[2]));
            let same = (s.row[2] >= 19.5) == (x[2] >= 19.5);
            assert_eq!(s.interpretable[2] == 1, same);
        }
    }

    #[test]
    fn constant_classifier_has_no_signal() {
        let (enc, ds) = toy();
        let pm = PerturbationModel::fit(&enc, &ds);
        let config = LimeConfig {
            samples: 500,
            explanation_len: 3,
            ..LimeConfig::default()
        };
        let e = explain(&|_: &[f64]| 0.5, &enc, &pm, &ds.rows()[7], &config).unwrap();
        assert_eq!(e.pairs.len(), 3);
        assert!(e.pairs.iter().all(|p| p.weight.abs() < 1e-6));
        assert_eq!(e.label, Prediction::Positive);
    }

    #[test]
    fn explanation_tracks_the_informative_column() {
        let (enc, ds) = toy();
        let pm = PerturbationModel::fit(&enc, &ds);
        let config = LimeConfig {
            samples: 2000,
            explanation_len: 2,
            ..LimeConfig::default()
        };
        let clf = |r: &[f64]| if r[2] >= 19.5 { 0.9 } else { 0.1 };
        let row = &ds.rows()[30];
        let e = explain(&clf, &enc, &pm, row, &config).unwrap();
        assert_eq!(e.label, Prediction::Positive);
        match &e.pairs[0].condition {
            Condition::Interval { feature, index, lower, upper } => {
                assert_eq!(feature, "size");
                assert_eq!(*index, 1);
                assert_eq!((*lower, *upper), (Some(19.5), None));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(e.pairs[0].weight > 0.5);
        assert!(e.pairs.windows(2).all(|w| w[0].weight.abs() >= w[1].weight.abs()));
    }

    #[test]
    fn rejects_bad_config() {
        let bad = LimeConfig {
            samples: 2,
            explanation_len: 3,
            ..LimeConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = LimeConfig {
            explanation_len: 0,
            ..LimeConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn condition_display() {
        let c = Condition::Indicator {
            feature: "thal".into(),
            category: "7".into(),
            present: false,
        };
        assert_eq!(alloc::string::ToString::to_string(&c), "thal_7 = 0");
        let c = Condition::Interval {
            feature: "bp".into(),
            index: 2,
            lower: Some(120.0),
            upper: Some(153.0),
        };
        assert_eq!(alloc::string::ToString::to_string(&c), "bp in [120, 153)");
    }
}

//! Turning explained rows into an inductive learning problem.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataRow, Dataset, FeatureKind, Value};
use crate::encode::Encoding;
use crate::lime::{Condition, Explanation};
use crate::logic::{self, Atom, BkRule, ParseError, Statement, Sym};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IlpError {
    #[error("explanation references unknown feature '{0}'")]
    UnknownFeature(String),
    #[error("explanation references unknown category '{category}' of feature '{feature}'")]
    UnknownCategory { feature: String, category: String },
    #[error("no explanation for row {0}")]
    MissingExplanation(u64),
    #[error("example {0} is both positive and negative")]
    Contradictory(String),
    #[error("fact {0} and its classical negation are both present")]
    Inconsistent(String),
    #[error("example {0} does not use the target predicate")]
    WrongTarget(String),
    #[error("examples must have exactly one argument: {0}")]
    ExampleArity(String),
    #[error("program has no target directive")]
    NoTarget,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Where a background fact came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactSource {
    pub fact: String,
    pub row: u64,
    pub condition: Condition,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IlpInstance {
    pub target: String,
    pub rules: Vec<BkRule>,
    pub facts: Vec<Atom>,
    pub positives: Vec<Sym>,
    pub negatives: Vec<Sym>,
    /// One entry per fact produced from an explanation pair.
    #[serde(default)]
    pub provenance: Vec<FactSource>,
}

impl IlpInstance {
    /// Checks disjoint example sets and classical consistency of the facts.
    pub fn validate(&self) -> Result<(), IlpError> {
        let pos: BTreeSet<&Sym> = self.positives.iter().collect();
        if let Some(e) = self.negatives.iter().find(|e| pos.contains(e)) {
            return Err(IlpError::Contradictory(e.to_string()));
        }
        let facts: BTreeSet<&Atom> = self.facts.iter().collect();
        if let Some(a) = self.facts.iter().find(|a| !a.negated && facts.contains(&a.complement())) {
            return Err(IlpError::Inconsistent(a.to_string()));
        }
        Ok(())
    }

    /// Facts that only stem from explanation pairs with negative weight.
    pub fn negative_weight_facts(&self) -> BTreeSet<Atom> {
        let mut by_fact: BTreeMap<&str, bool> = BTreeMap::new();
        for src in &self.provenance {
            let neg = by_fact.entry(src.fact.as_str()).or_insert(true);
            *neg &= src.weight < 0.0;
        }
        self.facts
            .iter()
            .filter(|a| by_fact.get(a.to_string().as_str()) == Some(&true))
            .cloned()
            .collect()
    }

    pub fn examples(&self) -> Vec<Sym> {
        self.positives.iter().chain(&self.negatives).cloned().collect()
    }
}

fn feature_fact(encoding: &Encoding, row: u64, condition: &Condition) -> Result<Atom, IlpError> {
    let schema = encoding.schema();
    let feature = condition.feature();
    let index = schema
        .feature_index(feature)
        .ok_or_else(|| IlpError::UnknownFeature(feature.into()))?;
    let id = Sym::from(row);
    match condition {
        Condition::Indicator {
            category, present, ..
        } => {
            let known = schema.feature(index).domain().is_some_and(|d| d.contains(category));
            if !known {
                return Err(IlpError::UnknownCategory {
                    feature: feature.into(),
                    category: category.clone(),
                });
            }
            let args = vec![id, Sym::new(category.as_str())];
            Ok(if *present {
                Atom::new(feature, args)
            } else {
                Atom::negated(feature, args)
            })
        }
        Condition::Interval { index: n, .. } => {
            if !schema.feature(index).is_numeric() {
                return Err(IlpError::UnknownFeature(feature.into()));
            }
            Ok(Atom::new(feature, vec![id, Sym::from(*n)]))
        }
    }
}

/// Builds the learning problem from per-row explanations. A row is a
/// positive example iff the explained model labelled it positive. Every
/// explanation pair becomes one fact, whatever the sign of its weight; the
/// weight is kept in the provenance.
pub fn transform(
    dataset: &Dataset,
    encoding: &Encoding,
    explanations: &[Explanation],
    target: &str,
) -> Result<IlpInstance, IlpError> {
    let by_id: BTreeMap<u64, &Explanation> = explanations.iter().map(|e| (e.sample_id, e)).collect();
    let mut instance = IlpInstance {
        target: target.into(),
        ..IlpInstance::default()
    };
    for row in dataset.rows() {
        let e = by_id.get(&row.id).ok_or(IlpError::MissingExplanation(row.id))?;
        let id = Sym::from(row.id);
        if e.label.is_positive() {
            instance.positives.push(id);
        } else {
            instance.negatives.push(id);
        }
        for pair in &e.pairs {
            let fact = feature_fact(encoding, row.id, &pair.condition)?;
            instance.provenance.push(FactSource {
                fact: fact.to_string(),
                row: row.id,
                condition: pair.condition.clone(),
                weight: pair.weight,
            });
            instance.facts.push(fact);
        }
    }
    instance.validate()?;
    Ok(instance)
}

/// Every fact describing `row` under `encoding`: `f(id,v)` for its category
/// `v` and `-f(id,u)` for each other category `u`, `f(id,n)` for the interval
/// `n` of a numeric value. Missing values produce nothing.
pub fn full_facts(encoding: &Encoding, row: &DataRow) -> Vec<Atom> {
    let id = Sym::from(row.id);
    let mut out = Vec::new();
    for (i, spec) in encoding.schema().features().iter().enumerate() {
        match (&spec.kind, row.values[i]) {
            (FeatureKind::Categorical { domain }, Value::Category(c)) => {
                for (j, v) in domain.iter().enumerate() {
                    let args = vec![id.clone(), Sym::new(v.as_str())];
                    out.push(if j == c {
                        Atom::new(spec.name.as_str(), args)
                    } else {
                        Atom::negated(spec.name.as_str(), args)
                    });
                }
            }
            (FeatureKind::Numeric, Value::Number(v)) => {
                if let Some(n) = encoding.interval(i, v) {
                    out.push(Atom::new(spec.name.as_str(), vec![id.clone(), Sym::from(n)]));
                }
            }
            _ => {}
        }
    }
    out
}

/// The learning problem over the full encoding of every row, labelled by
/// the dataset's own labels.
pub fn full_instance(dataset: &Dataset, encoding: &Encoding, target: &str) -> IlpInstance {
    let mut instance = IlpInstance {
        target: target.into(),
        ..IlpInstance::default()
    };
    for row in dataset.rows() {
        let id = Sym::from(row.id);
        if row.label {
            instance.positives.push(id);
        } else {
            instance.negatives.push(id);
        }
        instance.facts.extend(full_facts(encoding, row));
    }
    instance
}

/// Writes the instance as a program: target directive, rules, facts and
/// then the examples, each in stored order.
pub fn emit_program(instance: &IlpInstance) -> String {
    let mut out = String::new();
    let target = logic::predicate_name(&instance.target);
    let _ = writeln!(out, ":- target({target}).");
    for r in &instance.rules {
        let _ = writeln!(out, "{r}");
    }
    for f in &instance.facts {
        let _ = writeln!(out, "{f}.");
    }
    for e in &instance.positives {
        let _ = writeln!(out, "pos({target}({e})).");
    }
    for e in &instance.negatives {
        let _ = writeln!(out, "neg({target}({e})).");
    }
    out
}

pub fn parse_program(text: &str) -> Result<IlpInstance, IlpError> {
    let mut instance = IlpInstance::default();
    let mut target = None;
    let mut examples = Vec::new();
    for s in logic::parse_statements(text)? {
        match s {
            Statement::Target(t) => target = Some(t),
            Statement::Fact(a) => instance.facts.push(a),
            Statement::Rule(r) => instance.rules.push(r),
            Statement::Positive(a) => examples.push((true, a)),
            Statement::Negative(a) => examples.push((false, a)),
        }
    }
    instance.target = target.ok_or(IlpError::NoTarget)?;
    for (positive, atom) in examples {
        if atom.predicate != instance.target {
            return Err(IlpError::WrongTarget(atom.to_string()));
        }
        let [id] = <[Sym; 1]>::try_from(atom.args.clone())
            .map_err(|_| IlpError::ExampleArity(atom.to_string()))?;
        if positive {
            instance.positives.push(id);
        } else {
            instance.negatives.push(id);
        }
    }
    instance.validate()?;
    Ok(instance)
}

/// Default target predicate name for a dataset: its label column.
pub fn target_name(dataset: &Dataset) -> String {
    match dataset.schema().label_name() {
        "" => "target".into(),
        name => name.into(),
    }
}

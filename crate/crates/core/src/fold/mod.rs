//! Induction of default theories: FOIL, FOLD with abnormality predicates,
//! noise enumeration and pruning.
//!
//! The instance language has one example variable. Every body literal is a
//! background predicate applied to that variable and at most one constant,
//! possibly classically negated, or `not abK(X)` for an invented
//! abnormality predicate.

mod knowledge;
mod learn;
mod prune;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{predicate_name, Sym};

pub use knowledge::{Bits, CoverageResult, Knowledge};
pub use learn::{enumerate_facts, fold, foil, information_gain, induce, refine};
pub use prune::prune_hypothesis;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoldError {
    #[error("background rule outside the single-variable language: {0}")]
    UnsupportedRule(String),
    #[error("background fact must have one or two arguments: {0}")]
    UnsupportedFact(String),
    #[error("example {0} listed twice")]
    DuplicateExample(String),
    #[error("abnormality predicate ab{0} is referenced outside its stratum")]
    Unstratified(usize),
    #[error("invalid parameter: {0}")]
    Param(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldParams {
    /// Maximum body length of a clause, abnormality guard included.
    pub max_rule_length: usize,
    /// Maximum nesting of exceptions.
    pub max_exception_depth: usize,
    /// Description cost of one body literal.
    pub literal_cost: f64,
    /// Description cost of one enumerated ground fact.
    pub fact_cost: f64,
    pub prune: bool,
    /// Extra negatives a pruning step may cover.
    pub negative_tolerance: usize,
}

impl Default for FoldParams {
    fn default() -> Self {
        Self {
            max_rule_length: 7,
            max_exception_depth: 3,
            literal_cost: 1.0,
            fact_cost: 1.0,
            prune: true,
            negative_tolerance: 0,
        }
    }
}

impl FoldParams {
    pub fn validate(&self) -> Result<(), FoldError> {
        if self.max_rule_length == 0 {
            return Err(FoldError::Param("max_rule_length must be positive"));
        }
        if !(self.literal_cost >= 0.0 && self.fact_cost >= 0.0) {
            return Err(FoldError::Param("costs must be non-negative"));
        }
        Ok(())
    }
}

/// A background predicate applied to the example variable and an optional
/// constant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FactKey {
    pub predicate: String,
    pub value: Option<Sym>,
    pub negated: bool,
}

impl FactKey {
    pub fn new(predicate: &str, value: Option<Sym>, negated: bool) -> Self {
        Self {
            predicate: predicate.into(),
            value,
            negated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Literal {
    Holds(FactKey),
    NotAbnormal(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    Rule(Vec<Literal>),
    /// An enumerated ground fact about one example.
    Fact(Sym),
}

impl Clause {
    pub fn is_rule(&self) -> bool {
        matches!(self, Clause::Rule(_))
    }

    fn abnormal_refs(&self) -> impl Iterator<Item = usize> + '_ {
        let body: &[Literal] = match self {
            Clause::Rule(b) => b,
            Clause::Fact(_) => &[],
        };
        body.iter().filter_map(|l| match l {
            Literal::NotAbnormal(k) => Some(*k),
            Literal::Holds(_) => None,
        })
    }
}

/// Default clauses for the target plus the clauses of each invented
/// abnormality predicate; `abnormals[k]` defines `abk`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub target: String,
    pub defaults: Vec<Clause>,
    pub abnormals: Vec<Vec<Clause>>,
}

impl Hypothesis {
    /// Checks stratification: `abk` may only use `abj` with `j < k`.
    pub fn new(
        target: impl Into<String>,
        defaults: Vec<Clause>,
        abnormals: Vec<Vec<Clause>>,
    ) -> Result<Self, FoldError> {
        let h = Self {
            target: target.into(),
            defaults,
            abnormals,
        };
        h.check_stratified()?;
        Ok(h)
    }

    pub fn empty(target: impl Into<String>) -> Self {
        Self {
            target: target.into(),
            defaults: Vec::new(),
            abnormals: Vec::new(),
        }
    }

    pub fn check_stratified(&self) -> Result<(), FoldError> {
        let m = self.abnormals.len();
        for k in self.defaults.iter().flat_map(Clause::abnormal_refs) {
            if k >= m {
                return Err(FoldError::Unstratified(k));
            }
        }
        for (k, clauses) in self.abnormals.iter().enumerate() {
            for j in clauses.iter().flat_map(Clause::abnormal_refs) {
                if j >= k {
                    return Err(FoldError::Unstratified(j));
                }
            }
        }
        Ok(())
    }

    /// Default and abnormality clauses with a body; enumerated facts are
    /// not rules.
    pub fn rule_count(&self) -> usize {
        self.all_clauses().filter(|c| c.is_rule()).count()
    }

    pub fn fact_count(&self) -> usize {
        self.all_clauses().filter(|c| !c.is_rule()).count()
    }

    fn all_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.defaults.iter().chain(self.abnormals.iter().flatten())
    }

    /// Drops abnormality predicates that no default reaches and renumbers
    /// the rest in their original order.
    pub fn compact(&mut self) {
        let m = self.abnormals.len();
        let mut used = alloc::vec![false; m];
        let mut stack: Vec<usize> = self.defaults.iter().flat_map(Clause::abnormal_refs).collect();
        while let Some(k) = stack.pop() {
            if !core::mem::replace(&mut used[k], true) {
                stack.extend(self.abnormals[k].iter().flat_map(Clause::abnormal_refs));
            }
        }
        let mut renumber = alloc::vec![usize::MAX; m];
        let mut next = 0;
        for k in 0..m {
            if used[k] {
                renumber[k] = next;
                next += 1;
            }
        }
        let remap = |c: &mut Clause| {
            if let Clause::Rule(body) = c {
                for l in body {
                    if let Literal::NotAbnormal(k) = l {
                        *k = renumber[*k];
                    }
                }
            }
        };
        let old = core::mem::take(&mut self.abnormals);
        self.abnormals = old
            .into_iter()
            .enumerate()
            .filter(|(k, _)| used[*k])
            .map(|(_, mut cs)| {
                cs.iter_mut().for_each(remap);
                cs
            })
            .collect();
        self.defaults.iter_mut().for_each(remap);
    }

    /// Renders one clause with head `head`.
    pub fn clause_text(&self, head: &str, clause: &Clause) -> String {
        let mut s = String::new();
        let _ = write_clause(&mut s, head, clause);
        s
    }

    /// Per-clause coverage on a training instance.
    pub fn clause_statistics(&self, kb: &Knowledge, positives: &Bits, negatives: &Bits) -> Vec<ClauseStatistics> {
        let ab = kb.abnormal_extents(self);
        let mut out = Vec::new();
        let target = alloc::format!("{}", predicate_name(&self.target));
        for c in &self.defaults {
            let ext = kb.clause_extent(c, &ab);
            out.push(ClauseStatistics {
                clause: self.clause_text(&target, c),
                positives: ext.intersection_count(positives),
                negatives: ext.intersection_count(negatives),
            });
        }
        for (k, cs) in self.abnormals.iter().enumerate() {
            let head = alloc::format!("ab{k}");
            for c in cs {
                let ext = kb.clause_extent(c, &ab);
                out.push(ClauseStatistics {
                    clause: self.clause_text(&head, c),
                    positives: ext.intersection_count(positives),
                    negatives: ext.intersection_count(negatives),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseStatistics {
    pub clause: String,
    pub positives: usize,
    pub negatives: usize,
}

const VAR: &str = "X";

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Holds(key) => {
                if key.negated {
                    f.write_str("-")?;
                }
                write!(f, "{}({VAR}", predicate_name(&key.predicate))?;
                if let Some(v) = &key.value {
                    write!(f, ",{v}")?;
                }
                f.write_str(")")
            }
            Literal::NotAbnormal(k) => write!(f, "not ab{k}({VAR})"),
        }
    }
}

fn write_clause(out: &mut impl fmt::Write, head: &str, clause: &Clause) -> fmt::Result {
    match clause {
        Clause::Fact(e) => write!(out, "{head}({e})."),
        Clause::Rule(body) if body.is_empty() => write!(out, "{head}({VAR}) :- true."),
        Clause::Rule(body) => {
            write!(out, "{head}({VAR}) :- ")?;
            for (i, l) in body.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                write!(out, "{l}")?;
            }
            out.write_str(".")
        }
    }
}

/// One clause per line: defaults first, then abnormality clauses by
/// predicate number.
impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let target = alloc::format!("{}", predicate_name(&self.target));
        for c in &self.defaults {
            write_clause(f, &target, c)?;
            f.write_str("\n")?;
        }
        for (k, cs) in self.abnormals.iter().enumerate() {
            let head = alloc::format!("ab{k}");
            for c in cs {
                write_clause(f, &head, c)?;
                f.write_str("\n")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn holds(p: &str, v: Option<&str>, neg: bool) -> Literal {
        Literal::Holds(FactKey::new(p, v.map(Sym::from), neg))
    }

    #[test]
    fn prints_clauses() {
        let h = Hypothesis::new(
            "heart_disease",
            vec![
                Clause::Rule(vec![holds("chest_pain", Some("4"), false), holds("thal", Some("3"), true)]),
                Clause::Rule(vec![holds("slope", Some("2"), false), Literal::NotAbnormal(0)]),
                Clause::Fact(Sym::from(17u64)),
            ],
            vec![vec![Clause::Rule(vec![holds("major_vessels", Some("3"), false)])]],
        )
        .unwrap();
        assert_eq!(
            h.to_string(),
            "heart_disease(X) :- chest_pain(X,4), -thal(X,3).\n\
             heart_disease(X) :- slope(X,2), not ab0(X).\n\
             heart_disease(17).\n\
             ab0(X) :- major_vessels(X,3).\n"
        );
        assert_eq!(h.rule_count(), 3);
        assert_eq!(h.fact_count(), 1);
        assert_eq!(Hypothesis::empty("t").rule_count(), 0);
    }

    #[test]
    fn stratification_is_checked() {
        let bad = Hypothesis::new("t", vec![Clause::Rule(vec![Literal::NotAbnormal(0)])], vec![]);
        assert_eq!(bad, Err(FoldError::Unstratified(0)));
        let cyclic = Hypothesis::new(
            "t",
            vec![],
            vec![vec![Clause::Rule(vec![Literal::NotAbnormal(0)])]],
        );
        assert_eq!(cyclic, Err(FoldError::Unstratified(0)));
    }

    #[test]
    fn compact_drops_orphans_and_renumbers() {
        let mut h = Hypothesis::new(
            "t",
            vec![Clause::Rule(vec![holds("a", None, false), Literal::NotAbnormal(2)])],
            vec![
                vec![Clause::Fact(Sym::from("x"))],
                vec![Clause::Fact(Sym::from("y"))],
                vec![Clause::Rule(vec![holds("b", None, false), Literal::NotAbnormal(1)])],
            ],
        )
        .unwrap();
        h.compact();
        assert_eq!(h.to_string(), "t(X) :- a(X), not ab1(X).\nab0(y).\nab1(X) :- b(X), not ab0(X).\n");
        h.check_stratified().unwrap();
    }
}

//! Ground background knowledge indexed by example, and clause coverage.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::logic::{Atom, BkRule, Sym, Term};

use super::{Clause, FactKey, FoldError, Hypothesis, Literal};

/// A fixed-size set of example indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn empty(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut words = vec![u64::MAX; len.div_ceil(64)];
        if !len.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (len % 64)) - 1;
            }
        }
        Self { words, len }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Self::empty(len);
        for i in indices {
            b.insert(i);
        }
        b
    }

    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn and(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.and_assign(other);
        out
    }

    pub fn and_assign(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn minus_assign(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn minus(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.minus_assign(other);
        out
    }

    pub fn intersection_count(&self, other: &Bits) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }
}

/// Background facts about a fixed list of examples, closed under the
/// background rules.
#[derive(Debug, Clone)]
pub struct Knowledge {
    examples: Vec<Sym>,
    index: BTreeMap<Sym, usize>,
    extent: BTreeMap<FactKey, Bits>,
    /// Extents without the facts that only stem from negative-weight
    /// explanation pairs.
    primary: BTreeMap<FactKey, Bits>,
}

struct RuleShape {
    head: FactKey,
    body: Vec<FactKey>,
}

fn rule_shape(rule: &BkRule) -> Result<RuleShape, FoldError> {
    let unsupported = || FoldError::UnsupportedRule(rule.to_string());
    let var = match rule.head.args.first() {
        Some(Term::Var(v)) => v.clone(),
        _ => return Err(unsupported()),
    };
    let key = |p: &crate::logic::Pattern| -> Result<FactKey, FoldError> {
        match p.args.as_slice() {
            [Term::Var(v)] if *v == var => Ok(FactKey::new(&p.predicate, None, p.negated)),
            [Term::Var(v), Term::Const(c)] if *v == var => {
                Ok(FactKey::new(&p.predicate, Some(c.clone()), p.negated))
            }
            _ => Err(unsupported()),
        }
    };
    let head = key(&rule.head)?;
    let mut body = Vec::with_capacity(rule.body.len());
    for lit in &rule.body {
        if lit.naf {
            return Err(unsupported());
        }
        body.push(key(&lit.pattern)?);
    }
    Ok(RuleShape { head, body })
}

fn close(extent: &mut BTreeMap<FactKey, Bits>, rules: &[RuleShape], n: usize) {
    loop {
        let mut changed = false;
        for rule in rules {
            let mut derived = Bits::full(n);
            for k in &rule.body {
                match extent.get(k) {
                    Some(b) => derived.and_assign(b),
                    None => derived = Bits::empty(n),
                }
            }
            if derived.is_empty() {
                continue;
            }
            let head = extent.entry(rule.head.clone()).or_insert_with(|| Bits::empty(n));
            if !derived.is_subset(head) {
                head.or_assign(&derived);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

impl Knowledge {
    /// `facts` whose first argument is not an example are ignored; they can
    /// never affect an example under single-variable rules.
    pub fn new(
        examples: &[Sym],
        facts: &[Atom],
        rules: &[BkRule],
        negative_weight: &BTreeSet<Atom>,
    ) -> Result<Self, FoldError> {
        let n = examples.len();
        let mut index = BTreeMap::new();
        for (i, e) in examples.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(FoldError::DuplicateExample(e.to_string()));
            }
        }
        let mut extent: BTreeMap<FactKey, Bits> = BTreeMap::new();
        let mut primary: BTreeMap<FactKey, Bits> = BTreeMap::new();
        for atom in facts {
            let (id, value) = match atom.args.as_slice() {
                [id] => (id, None),
                [id, v] => (id, Some(v.clone())),
                _ => return Err(FoldError::UnsupportedFact(atom.to_string())),
            };
            let Some(&i) = index.get(id) else { continue };
            let key = FactKey::new(&atom.predicate, value, atom.negated);
            extent
                .entry(key.clone())
                .or_insert_with(|| Bits::empty(n))
                .insert(i);
            let bits = primary.entry(key).or_insert_with(|| Bits::empty(n));
            if !negative_weight.contains(atom) {
                bits.insert(i);
            }
        }
        let shapes = rules.iter().map(rule_shape).collect::<Result<Vec<_>, _>>()?;
        close(&mut extent, &shapes, n);
        close(&mut primary, &shapes, n);
        Ok(Self {
            examples: examples.to_vec(),
            index,
            extent,
            primary,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn example(&self, i: usize) -> &Sym {
        &self.examples[i]
    }

    pub fn index_of(&self, e: &Sym) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// The set of the given examples; unknown ones are skipped.
    pub fn set_of<'a>(&self, examples: impl IntoIterator<Item = &'a Sym>) -> Bits {
        Bits::from_indices(self.len(), examples.into_iter().filter_map(|e| self.index_of(e)))
    }

    pub fn extent(&self, key: &FactKey) -> Bits {
        self.extent.get(key).cloned().unwrap_or_else(|| Bits::empty(self.len()))
    }

    pub(crate) fn keys(&self) -> impl Iterator<Item = (&FactKey, &Bits, &Bits)> {
        self.extent
            .iter()
            .map(|(k, b)| (k, b, self.primary.get(k).expect("same keys")))
    }

    /// Whether the closed background knowledge contains `key` for example
    /// `i`, by direct lookup.
    pub fn holds(&self, i: usize, key: &FactKey) -> bool {
        self.extent.get(key).is_some_and(|b| b.contains(i))
    }

    pub fn literal_extent(&self, literal: &Literal, abnormal: &[Bits]) -> Bits {
        match literal {
            Literal::Holds(key) => self.extent(key),
            Literal::NotAbnormal(k) => Bits::full(self.len()).minus(&abnormal[*k]),
        }
    }

    pub fn clause_extent(&self, clause: &Clause, abnormal: &[Bits]) -> Bits {
        match clause {
            Clause::Rule(body) => {
                let mut b = Bits::full(self.len());
                for l in body {
                    b.and_assign(&self.literal_extent(l, abnormal));
                }
                b
            }
            Clause::Fact(e) => Bits::from_indices(self.len(), self.index_of(e)),
        }
    }

    pub fn clauses_extent(&self, clauses: &[Clause], abnormal: &[Bits]) -> Bits {
        let mut b = Bits::empty(self.len());
        for c in clauses {
            b.or_assign(&self.clause_extent(c, abnormal));
        }
        b
    }

    /// Extents of every abnormality predicate, lowest stratum first.
    pub fn abnormal_extents(&self, hypothesis: &Hypothesis) -> Vec<Bits> {
        let mut out: Vec<Bits> = Vec::with_capacity(hypothesis.abnormals.len());
        for clauses in &hypothesis.abnormals {
            let b = self.clauses_extent(clauses, &out);
            out.push(b);
        }
        out
    }

    /// Examples for which the target is derivable.
    pub fn covers(&self, hypothesis: &Hypothesis) -> Bits {
        let ab = self.abnormal_extents(hypothesis);
        self.clauses_extent(&hypothesis.defaults, &ab)
    }

    pub fn coverage(&self, hypothesis: &Hypothesis, examples: &Bits) -> CoverageResult {
        let covered = self.covers(hypothesis).and(examples);
        CoverageResult {
            uncovered: examples.minus(&covered),
            covered,
        }
    }
}

/// A split of a queried example set.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageResult {
    pub covered: Bits,
    pub uncovered: Bits,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{BodyLiteral, Pattern};

    #[test]
    fn bit_operations() {
        let mut a = Bits::empty(130);
        a.insert(0);
        a.insert(64);
        a.insert(129);
        assert_eq!(a.count(), 3);
        assert!(a.contains(129) && !a.contains(128) && !a.contains(500));
        let b = Bits::from_indices(130, [64, 100]);
        assert_eq!(a.intersection_count(&b), 1);
        assert_eq!(a.minus(&b).iter().collect::<Vec<_>>(), [0, 129]);
        assert!(Bits::from_indices(130, [64]).is_subset(&a));
        assert_eq!(Bits::full(130).count(), 130);
        assert!(Bits::empty(0).is_empty());
    }

    #[test]
    fn closure_applies_rules() {
        let ex: Vec<Sym> = ["a", "b"].iter().map(|s| Sym::from(*s)).collect();
        let rule = BkRule {
            head: Pattern {
                predicate: "bird".into(),
                args: vec![Term::Var("X".into())],
                negated: false,
            },
            body: vec![BodyLiteral {
                pattern: Pattern {
                    predicate: "penguin".into(),
                    args: vec![Term::Var("X".into())],
                    negated: false,
                },
                naf: false,
            }],
        };
        let facts = vec![Atom::new("penguin", vec!["b".into()]), Atom::new("cat", vec!["zed".into()])];
        let kb = Knowledge::new(&ex, &facts, &[rule], &BTreeSet::new()).unwrap();
        assert!(kb.holds(1, &FactKey::new("bird", None, false)));
        assert!(!kb.holds(0, &FactKey::new("bird", None, false)));
        assert!(kb.extent(&FactKey::new("cat", None, false)).is_empty());
    }

    #[test]
    fn rejects_unsupported_shapes() {
        let ex = vec![Sym::from("a")];
        let facts = vec![Atom::new("p", vec!["a".into(), "1".into(), "2".into()])];
        assert!(matches!(
            Knowledge::new(&ex, &facts, &[], &BTreeSet::new()),
            Err(FoldError::UnsupportedFact(_))
        ));
        let dup = vec![Sym::from("a"), Sym::from("a")];
        assert!(matches!(
            Knowledge::new(&dup, &[], &[], &BTreeSet::new()),
            Err(FoldError::DuplicateExample(_))
        ));
    }
}

use alloc::vec;
use alloc::vec::Vec;

use super::{Bits, Clause, FactKey, FoldError, FoldParams, Hypothesis, Knowledge, Literal};

/// Weighted information gain of specializing a clause covering `p0`
/// positives and `n0` negatives into one covering `p1` and `n1`, with `t`
/// positives covered by both. `-inf` when nothing positive stays covered.
pub fn information_gain(p0: usize, n0: usize, p1: usize, n1: usize, t: usize) -> f64 {
    if p1 == 0 || p0 == 0 {
        return f64::NEG_INFINITY;
    }
    let before = libm::log2(p0 as f64 / (p0 + n0) as f64);
    let after = libm::log2(p1 as f64 / (p1 + n1) as f64);
    t as f64 * (after - before)
}

struct Best {
    key: FactKey,
    gain: f64,
    positives: usize,
}

/// Candidate literals for extending `body`. A literal qualifies when the
/// background knowledge states it for some example, and, if it carries a
/// constant, for one of the currently covered positives. Facts that only
/// stem from negative-weight explanations count when `admit_negative_weight`.
pub fn refine(
    kb: &Knowledge,
    body: &[Literal],
    covered_positives: &Bits,
    admit_negative_weight: bool,
) -> Vec<Literal> {
    candidates(kb, body, covered_positives, admit_negative_weight)
        .map(|(k, _)| Literal::Holds(k.clone()))
        .collect()
}

fn candidates<'a>(
    kb: &'a Knowledge,
    body: &'a [Literal],
    covered_positives: &'a Bits,
    admit_negative_weight: bool,
) -> impl Iterator<Item = (&'a FactKey, &'a Bits)> + 'a {
    kb.keys().filter_map(move |(key, extent, primary)| {
        let support = if admit_negative_weight { extent } else { primary };
        let usable = if key.value.is_some() {
            support.intersects(covered_positives)
        } else {
            !support.is_empty()
        };
        let in_body = body
            .iter()
            .any(|l| matches!(l, Literal::Holds(k) if k == key));
        (usable && !in_body).then_some((key, extent))
    })
}

fn best_literal(
    kb: &Knowledge,
    body: &[Literal],
    pos: &Bits,
    neg: &Bits,
    admit_negative_weight: bool,
) -> Option<Best> {
    let (p0, n0) = (pos.count(), neg.count());
    let mut best: Option<Best> = None;
    for (key, extent) in candidates(kb, body, pos, admit_negative_weight) {
        let p1 = extent.intersection_count(pos);
        let n1 = extent.intersection_count(neg);
        let gain = information_gain(p0, n0, p1, n1, p1);
        // keys arrive in ascending order, so ties keep the earlier key
        let better = match &best {
            None => true,
            Some(b) => gain > b.gain || (gain == b.gain && p1 > b.positives),
        };
        if better {
            best = Some(Best {
                key: key.clone(),
                gain,
                positives: p1,
            });
        }
    }
    best
}

/// Ground facts for the examples in `positives`.
pub fn enumerate_facts(kb: &Knowledge, positives: &Bits) -> Vec<Clause> {
    positives.iter().map(|i| Clause::Fact(kb.example(i).clone())).collect()
}

struct Learner<'a> {
    kb: &'a Knowledge,
    params: &'a FoldParams,
    abnormals: Vec<Vec<Clause>>,
    extents: Vec<Bits>,
}

impl Learner<'_> {
    fn invent(&mut self, clauses: Vec<Clause>) -> usize {
        let extent = self.kb.clauses_extent(&clauses, &self.extents);
        self.abnormals.push(clauses);
        self.extents.push(extent);
        self.abnormals.len() - 1
    }

    fn restrict(&self, literal: &Literal, pos: &mut Bits, neg: &mut Bits) {
        let ext = self.kb.literal_extent(literal, &self.extents);
        pos.and_assign(&ext);
        neg.and_assign(&ext);
    }

    fn check_gain(&self, start_pos: &Bits, start_neg: &Bits, body: &[Literal], extended: &[Literal], gain: f64) {
        if cfg!(debug_assertions) {
            let count = |b: &[Literal], set: &Bits| {
                let ext = self.kb.clause_extent(&Clause::Rule(b.to_vec()), &self.extents);
                set.iter().filter(|&i| ext.contains(i)).count()
            };
            let (p0, n0) = (count(body, start_pos), count(body, start_neg));
            let (p1, n1) = (count(extended, start_pos), count(extended, start_neg));
            let fresh = information_gain(p0, n0, p1, n1, p1);
            debug_assert!(
                fresh == gain || (fresh - gain).abs() <= 1e-9 * gain.abs().max(1.0),
                "cached gain {gain} disagrees with recomputed {fresh}"
            );
        }
    }

    fn fold(&mut self, pos: &Bits, neg: &Bits, depth: usize) -> Vec<Clause> {
        let mut remaining = pos.clone();
        let mut out = Vec::new();
        while !remaining.is_empty() {
            let mut clauses = self.specialize(&remaining, neg, depth);
            let mut covered = self.kb.clauses_extent(&clauses, &self.extents);
            if !covered.intersects(&remaining) {
                clauses = enumerate_facts(self.kb, &remaining);
                covered = remaining.clone();
            }
            remaining.minus_assign(&covered);
            out.extend(clauses);
        }
        out
    }

    /// Grows one clause covering part of `pos`. Returns the rule, or the
    /// enumerated facts that replace it.
    fn specialize(&mut self, pos: &Bits, neg: &Bits, depth: usize) -> Vec<Clause> {
        let max_len = self.params.max_rule_length;
        let mut body: Vec<Literal> = Vec::new();
        let mut cp = pos.clone();
        let mut cn = neg.clone();
        while !cn.is_empty() {
            // the last slot is kept for an abnormality guard
            if body.len() + 1 < max_len {
                if let Some(best) = best_literal(self.kb, &body, &cp, &cn, depth > 0) {
                    if best.gain > 0.0 {
                        let lit = Literal::Holds(best.key);
                        let mut extended = body.clone();
                        extended.push(lit.clone());
                        self.check_gain(pos, neg, &body, &extended, best.gain);
                        self.restrict(&lit, &mut cp, &mut cn);
                        body = extended;
                        continue;
                    }
                }
            }
            if body.len() >= max_len {
                return enumerate_facts(self.kb, &cp);
            }
            if depth < self.params.max_exception_depth {
                if let Some(k) = self.exception(&body, &cp, &cn, depth) {
                    let lit = Literal::NotAbnormal(k);
                    self.restrict(&lit, &mut cp, &mut cn);
                    body.push(lit);
                    continue;
                }
            }
            let keep = self.params.literal_cost * (body.len() + 1) as f64
                + self.params.fact_cost * cn.count() as f64;
            let enumerate = self.params.fact_cost * cp.count() as f64;
            if keep > enumerate {
                return enumerate_facts(self.kb, &cp);
            }
            // the remaining negatives are noise: exclude them by name
            let k = self.invent(enumerate_facts(self.kb, &cn));
            let lit = Literal::NotAbnormal(k);
            self.restrict(&lit, &mut cp, &mut cn);
            body.push(lit);
        }
        // a target rule pays for its head and positive literals, its guards are
        // paid for by the abnormality clauses; those share an invented head and
        // pay per body literal
        let written = if depth == 0 {
            1 + body.iter().filter(|l| matches!(l, Literal::Holds(_))).count()
        } else {
            body.len()
        };
        let cost = self.params.literal_cost * written as f64;
        if cost > self.params.fact_cost * cp.count() as f64 {
            return enumerate_facts(self.kb, &cp);
        }
        vec![Clause::Rule(body)]
    }

    /// Learns the covered negatives as exceptions by swapping the example
    /// roles. Returns the new abnormality predicate.
    fn exception(&mut self, body: &[Literal], pos: &Bits, neg: &Bits, depth: usize) -> Option<usize> {
        let best = best_literal(self.kb, body, neg, pos, true)?;
        if !(best.gain > 0.0) {
            return None;
        }
        let clauses = self.fold(neg, pos, depth + 1);
        Some(self.invent(clauses))
    }
}

/// Learns a default theory for `positives` against `negatives`, without
/// pruning.
pub fn fold(
    kb: &Knowledge,
    positives: &Bits,
    negatives: &Bits,
    target: &str,
    params: &FoldParams,
) -> Result<Hypothesis, FoldError> {
    params.validate()?;
    let mut learner = Learner {
        kb,
        params,
        abnormals: Vec::new(),
        extents: Vec::new(),
    };
    let defaults = learner.fold(positives, negatives, 0);
    let mut h = Hypothesis::new(target, defaults, learner.abnormals)?;
    h.compact();
    Ok(h)
}

/// `fold` followed by pruning when `params.prune` is set.
pub fn induce(
    kb: &Knowledge,
    positives: &Bits,
    negatives: &Bits,
    target: &str,
    params: &FoldParams,
) -> Result<Hypothesis, FoldError> {
    let h = fold(kb, positives, negatives, target, params)?;
    Ok(if params.prune {
        super::prune_hypothesis(kb, &h, positives, negatives, params.negative_tolerance)
    } else {
        h
    })
}

/// Sequential covering with Horn clauses only. A clause that cannot be
/// made consistent within the length bound is replaced by its covered
/// positives as ground facts.
pub fn foil(
    kb: &Knowledge,
    positives: &Bits,
    negatives: &Bits,
    target: &str,
    params: &FoldParams,
) -> Result<Hypothesis, FoldError> {
    params.validate()?;
    let mut remaining = positives.clone();
    let mut defaults = Vec::new();
    while !remaining.is_empty() {
        let mut body = Vec::new();
        let mut cp = remaining.clone();
        let mut cn = negatives.clone();
        while !cn.is_empty() && body.len() < params.max_rule_length {
            match best_literal(kb, &body, &cp, &cn, true) {
                Some(best) if best.gain > 0.0 => {
                    let ext = kb.extent(&best.key);
                    cp.and_assign(&ext);
                    cn.and_assign(&ext);
                    body.push(Literal::Holds(best.key));
                }
                _ => break,
            }
        }
        let clauses = if cn.is_empty() {
            vec![Clause::Rule(body)]
        } else {
            enumerate_facts(kb, &cp)
        };
        remaining.minus_assign(&cp);
        defaults.extend(clauses);
    }
    Hypothesis::new(target, defaults, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Atom, Sym};
    use alloc::collections::BTreeSet;
    use alloc::string::ToString;

    #[test]
    fn gain_examples() {
        let g = information_gain(5, 5, 4, 1, 4);
        assert!((g - 2.712_287_620_450_551).abs() < 1e-12);
        assert_eq!(information_gain(4, 4, 2, 2, 2), 0.0);
        assert_eq!(information_gain(5, 5, 0, 3, 0), f64::NEG_INFINITY);
    }

    fn unary(ex: &[&str], facts: &[(&str, &str)]) -> Knowledge {
        let ex: Vec<Sym> = ex.iter().map(|s| Sym::from(*s)).collect();
        let facts: Vec<Atom> = facts.iter().map(|(p, e)| Atom::new(*p, vec![Sym::from(*e)])).collect();
        Knowledge::new(&ex, &facts, &[], &BTreeSet::new()).unwrap()
    }

    #[test]
    fn single_literal_separates() {
        let kb = unary(&["a", "b", "c", "d"], &[("p", "a"), ("p", "b"), ("q", "c")]);
        let pos = Bits::from_indices(4, [0, 1]);
        let neg = Bits::from_indices(4, [2, 3]);
        for h in [
            foil(&kb, &pos, &neg, "t", &FoldParams::default()).unwrap(),
            induce(&kb, &pos, &neg, "t", &FoldParams::default()).unwrap(),
        ] {
            assert_eq!(h.to_string(), "t(X) :- p(X).\n");
        }
    }

    #[test]
    fn no_negatives_gives_true() {
        let kb = unary(&["a", "b"], &[("p", "a")]);
        let pos = Bits::full(2);
        let h = induce(&kb, &pos, &Bits::empty(2), "t", &FoldParams::default()).unwrap();
        assert_eq!(h.to_string(), "t(X) :- true.\n");
        let h = induce(&kb, &Bits::empty(2), &pos, "t", &FoldParams::default()).unwrap();
        assert_eq!(h.rule_count() + h.fact_count(), 0);
    }

    #[test]
    fn refine_skips_used_and_irrelevant_literals() {
        let ex: Vec<Sym> = ["a", "b"].iter().map(|s| Sym::from(*s)).collect();
        let facts = vec![
            Atom::new("f", vec!["a".into(), "1".into()]),
            Atom::new("f", vec!["b".into(), "2".into()]),
            Atom::new("g", vec!["a".into()]),
        ];
        let kb = Knowledge::new(&ex, &facts, &[], &BTreeSet::new()).unwrap();
        let only_a = Bits::from_indices(2, [0]);
        let got: Vec<_> = refine(&kb, &[], &only_a, true).iter().map(|l| l.to_string()).collect();
        assert_eq!(got, ["f(X,1)", "g(X)"]);
        let used = [Literal::Holds(FactKey::new("g", None, false))];
        let got: Vec<_> = refine(&kb, &used, &only_a, true).iter().map(|l| l.to_string()).collect();
        assert_eq!(got, ["f(X,1)"]);
        assert!(refine(&kb, &[], &Bits::empty(2), true)
            .iter()
            .all(|l| matches!(l, Literal::Holds(k) if k.value.is_none())));
    }

    #[test]
    fn negative_weight_facts_only_inside_exceptions() {
        let ex: Vec<Sym> = ["a", "b"].iter().map(|s| Sym::from(*s)).collect();
        let low = Atom::new("f", vec!["a".into(), "1".into()]);
        let low_set: BTreeSet<Atom> = [low.clone()].into_iter().collect();
        let kb = Knowledge::new(&ex, &[low], &[], &low_set).unwrap();
        let a = Bits::from_indices(2, [0]);
        assert!(refine(&kb, &[], &a, false).is_empty());
        assert_eq!(refine(&kb, &[], &a, true).len(), 1);
    }

    #[test]
    fn enumerates_when_nothing_separates() {
        // identical descriptions, opposite labels
        let kb = unary(&["a", "b", "c"], &[("p", "a"), ("p", "b"), ("p", "c")]);
        let pos = Bits::from_indices(3, [0, 1]);
        let neg = Bits::from_indices(3, [2]);
        let h = fold(&kb, &pos, &neg, "t", &FoldParams::default()).unwrap();
        // keeping `t :- not ab0` with `ab0(c)` costs 2, enumerating a and b costs 2
        assert_eq!(h.to_string(), "t(X) :- not ab0(X).\nab0(c).\n");
        let costly = FoldParams {
            fact_cost: 1.0,
            literal_cost: 5.0,
            ..FoldParams::default()
        };
        let h = fold(&kb, &pos, &neg, "t", &costly).unwrap();
        assert_eq!(h.to_string(), "t(a).\nt(b).\n");
        assert_eq!(enumerate_facts(&kb, &Bits::empty(3)), vec![]);
    }

    #[test]
    fn target_rules_pay_for_their_head() {
        // `t :- p` costs 2 and covers one positive; the fact costs 1
        let kb = unary(&["a", "b"], &[("p", "a")]);
        let h = fold(&kb, &Bits::from_indices(2, [0]), &Bits::from_indices(2, [1]), "t", &FoldParams::default())
            .unwrap();
        assert_eq!(h.to_string(), "t(a).\n");
        // the same rule for two positives breaks even and is kept
        let kb = unary(&["a", "b", "c"], &[("p", "a"), ("p", "b")]);
        let h = fold(&kb, &Bits::from_indices(3, [0, 1]), &Bits::from_indices(3, [2]), "t", &FoldParams::default())
            .unwrap();
        assert_eq!(h.to_string(), "t(X) :- p(X).\n");
    }

    #[test]
    fn mdl_guard_abandons_expensive_clause() {
        // the only consistent rule needs two literals for one positive
        let kb = unary(
            &["a", "b", "c"],
            &[("p", "a"), ("q", "a"), ("p", "b"), ("q", "c")],
        );
        let pos = Bits::from_indices(3, [0]);
        let neg = Bits::from_indices(3, [1, 2]);
        let h = fold(&kb, &pos, &neg, "t", &FoldParams::default()).unwrap();
        assert_eq!(h.to_string(), "t(a).\n");
        let cheap = FoldParams {
            fact_cost: 3.0,
            ..FoldParams::default()
        };
        let h = fold(&kb, &pos, &neg, "t", &cheap).unwrap();
        assert_eq!(h.to_string(), "t(X) :- p(X), q(X).\n");
    }
}

use alloc::vec::Vec;

use super::{Bits, Clause, Hypothesis, Knowledge, Literal};

struct Baseline<'a> {
    kb: &'a Knowledge,
    positives: Bits,
    negatives: Bits,
    all_negatives: &'a Bits,
    tolerance: usize,
}

impl Baseline<'_> {
    /// No covered positive is lost and at most `tolerance` new negatives
    /// are covered.
    fn admits(&self, h: &Hypothesis) -> bool {
        let covered = self.kb.covers(h);
        self.positives.is_subset(&covered)
            && covered.and(self.all_negatives).minus(&self.negatives).count() <= self.tolerance
    }
}

/// Removes body literals and then whole clauses whose removal neither loses
/// a covered positive nor covers more than `tolerance` extra negatives.
/// Clauses are tried in ascending order of the positives they cover.
/// Abnormality predicates left without users are dropped.
pub fn prune_hypothesis(
    kb: &Knowledge,
    hypothesis: &Hypothesis,
    positives: &Bits,
    negatives: &Bits,
    tolerance: usize,
) -> Hypothesis {
    let covered = kb.covers(hypothesis);
    let base = Baseline {
        kb,
        positives: covered.and(positives),
        negatives: covered.and(negatives),
        all_negatives: negatives,
        tolerance,
    };
    let mut h = hypothesis.clone();

    // literal pass, defaults before abnormality clauses
    let mut slots: Vec<(Option<usize>, usize)> = (0..h.defaults.len()).map(|i| (None, i)).collect();
    for (k, cs) in h.abnormals.iter().enumerate() {
        slots.extend((0..cs.len()).map(|i| (Some(k), i)));
    }
    for (group, i) in slots {
        let mut j = 0;
        loop {
            let clause = clause_mut(&mut h, group, i);
            let Clause::Rule(body) = clause else { break };
            if j >= body.len() {
                break;
            }
            let removed = body.remove(j);
            if base.admits(&h) {
                continue;
            }
            if let Clause::Rule(body) = clause_mut(&mut h, group, i) {
                body.insert(j, removed);
            }
            j += 1;
        }
    }

    // clause pass
    let ab = kb.abnormal_extents(&h);
    h.defaults = drop_clauses(&base, &h, None, &ab);
    for k in 0..h.abnormals.len() {
        let ab = kb.abnormal_extents(&h);
        h.abnormals[k] = drop_clauses(&base, &h, Some(k), &ab);
    }

    // `not abK` over an empty abK is vacuous
    let empty: Vec<bool> = h.abnormals.iter().map(Vec::is_empty).collect();
    let strip = |c: &mut Clause| {
        if let Clause::Rule(body) = c {
            body.retain(|l| !matches!(l, Literal::NotAbnormal(k) if empty[*k]));
        }
    };
    h.defaults.iter_mut().for_each(strip);
    h.abnormals.iter_mut().flatten().for_each(strip);
    h.compact();
    debug_assert!(h.check_stratified().is_ok());
    h
}

fn clause_mut(h: &mut Hypothesis, group: Option<usize>, i: usize) -> &mut Clause {
    match group {
        None => &mut h.defaults[i],
        Some(k) => &mut h.abnormals[k][i],
    }
}

fn drop_clauses(base: &Baseline<'_>, h: &Hypothesis, group: Option<usize>, ab: &[Bits]) -> Vec<Clause> {
    let clauses = match group {
        None => &h.defaults,
        Some(k) => &h.abnormals[k],
    };
    let mut order: Vec<(usize, usize)> = clauses
        .iter()
        .enumerate()
        .map(|(i, c)| (base.kb.clause_extent(c, ab).intersection_count(&base.positives), i))
        .collect();
    order.sort();
    let mut keep = alloc::vec![true; clauses.len()];
    let mut trial = h.clone();
    for (_, i) in order {
        keep[i] = false;
        let kept: Vec<Clause> = clauses
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(c, _)| c.clone())
            .collect();
        match group {
            None => trial.defaults = kept,
            Some(k) => trial.abnormals[k] = kept,
        }
        if !base.admits(&trial) {
            keep[i] = true;
        }
    }
    clauses
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(c, _)| c.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fold::FactKey;
    use crate::logic::{Atom, Sym};
    use alloc::collections::BTreeSet;
    use alloc::string::ToString;
    use alloc::vec;

    fn lit(p: &str) -> Literal {
        Literal::Holds(FactKey::new(p, None, false))
    }

    fn kb() -> Knowledge {
        let ex: Vec<Sym> = ["a", "b", "c", "d"].iter().map(|s| Sym::from(*s)).collect();
        let facts: Vec<Atom> = [("p", "a"), ("p", "b"), ("q", "a"), ("q", "b"), ("r", "a")]
            .iter()
            .map(|(p, e)| Atom::new(*p, vec![Sym::from(*e)]))
            .collect();
        Knowledge::new(&ex, &facts, &[], &BTreeSet::new()).unwrap()
    }

    #[test]
    fn removes_redundant_literal() {
        let kb = kb();
        let pos = Bits::from_indices(4, [0, 1]);
        let neg = Bits::from_indices(4, [2, 3]);
        let h = Hypothesis::new("t", vec![Clause::Rule(vec![lit("p"), lit("q")])], vec![]).unwrap();
        let pruned = prune_hypothesis(&kb, &h, &pos, &neg, 0);
        assert_eq!(pruned.to_string(), "t(X) :- q(X).\n");
        assert_eq!(kb.covers(&pruned), kb.covers(&h));
    }

    #[test]
    fn removes_subsumed_clause() {
        let kb = kb();
        let pos = Bits::from_indices(4, [0, 1]);
        let neg = Bits::from_indices(4, [2, 3]);
        let h = Hypothesis::new(
            "t",
            vec![Clause::Rule(vec![lit("p")]), Clause::Rule(vec![lit("r")]), Clause::Fact(Sym::from("b"))],
            vec![],
        )
        .unwrap();
        let pruned = prune_hypothesis(&kb, &h, &pos, &neg, 0);
        assert_eq!(pruned.to_string(), "t(X) :- p(X).\n");
    }

    #[test]
    fn drops_useless_exception() {
        let kb = kb();
        let pos = Bits::from_indices(4, [0, 1]);
        let neg = Bits::from_indices(4, [2, 3]);
        let h = Hypothesis::new(
            "t",
            vec![Clause::Rule(vec![lit("p"), Literal::NotAbnormal(0)])],
            vec![vec![Clause::Fact(Sym::from("d"))]],
        )
        .unwrap();
        let pruned = prune_hypothesis(&kb, &h, &pos, &neg, 0);
        assert_eq!(pruned.to_string(), "t(X) :- p(X).\n");
    }
}

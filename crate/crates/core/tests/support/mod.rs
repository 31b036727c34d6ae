//! Independent oracles and random instance generators shared by the
//! property tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeSet;

use limefold_core::fold::{Clause, FactKey, Hypothesis, Literal};
use limefold_core::logic::{Atom, BkRule, BodyLiteral, Pattern, Sym, Term};
use rand::Rng;

/// Gain recomputed with natural logarithms and explicit ratios.
pub fn gain_oracle(p0: usize, n0: usize, p1: usize, n1: usize, t: usize) -> f64 {
    if p0 == 0 || p1 == 0 {
        return f64::NEG_INFINITY;
    }
    let before = (p0 as f64 / (p0 + n0) as f64).ln();
    let after = (p1 as f64 / (p1 + n1) as f64).ln();
    t as f64 * (after - before) / std::f64::consts::LN_2
}

fn entropy_of(labels: &[bool]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let n = labels.len() as f64;
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    [pos, n - pos]
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| -(c / n) * (c / n).ln() / std::f64::consts::LN_2)
        .sum()
}

fn class_count(labels: &[bool]) -> f64 {
    let set: BTreeSet<bool> = labels.iter().copied().collect();
    set.len() as f64
}

/// Fayyad-Irani discretization written out literally: every boundary
/// between distinct adjacent values is scored from scratch, the lowest
/// entropy wins (smallest cut on ties) and the MDLP inequality decides.
pub fn mdlp_oracle(samples: &[(f64, bool)]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut cuts = Vec::new();
    mdlp_rec(&s, &mut cuts);
    cuts
}

fn mdlp_rec(s: &[(f64, bool)], cuts: &mut Vec<f64>) {
    let n = s.len();
    let labels: Vec<bool> = s.iter().map(|x| x.1).collect();
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for i in 1..n {
        if s[i - 1].0 != s[i].0 {
            let left = &labels[..i];
            let right = &labels[i..];
            let e = left.len() as f64 / n as f64 * entropy_of(left) + right.len() as f64 / n as f64 * entropy_of(right);
            candidates.push((e, i));
        }
    }
    let Some(min) = candidates.iter().map(|c| c.0).reduce(f64::min) else {
        return;
    };
    let &(e, i) = candidates.iter().find(|c| c.0 <= min + 1e-12).unwrap();
    let (left, right) = (&labels[..i], &labels[i..]);
    let whole = entropy_of(&labels);
    let gain = whole - e;
    let k = class_count(&labels);
    let delta = (3f64.powf(k) - 2.0).log2()
        - (k * whole - class_count(left) * entropy_of(left) - class_count(right) * entropy_of(right));
    if gain > ((n as f64 - 1.0).log2() + delta) / n as f64 {
        mdlp_rec(&s[..i], cuts);
        let (lo, hi) = (s[i - 1].0, s[i].0);
        let mid = lo + (hi - lo) / 2.0;
        cuts.push(if mid > lo { mid } else { hi });
        mdlp_rec(&s[i..], cuts);
    }
}

/// Ground atom as text, built from the raw fields.
fn ground(predicate: &str, negated: bool, example: &str, value: Option<&str>) -> String {
    let sign = if negated { "-" } else { "" };
    match value {
        Some(v) => format!("{sign}{predicate}({example},{v})"),
        None => format!("{sign}{predicate}({example})"),
    }
}

fn key_ground(key: &FactKey, example: &str) -> String {
    ground(&key.predicate, key.negated, example, key.value.as_ref().map(Sym::as_str))
}

fn pattern_ground(p: &Pattern, example: &str) -> String {
    let value = match p.args.get(1) {
        Some(Term::Const(c)) => Some(c.as_str()),
        _ => None,
    };
    ground(&p.predicate, p.negated, example, value)
}

/// Examples covered by `h`, computed by grounding every rule for every
/// example and iterating the background rules to a fixpoint, then the
/// abnormality strata bottom-up.
pub fn coverage_oracle(examples: &[Sym], facts: &[Atom], rules: &[BkRule], h: &Hypothesis) -> BTreeSet<usize> {
    let mut model: BTreeSet<String> = facts
        .iter()
        .map(|a| ground(&a.predicate, a.negated, a.args[0].as_str(), a.args.get(1).map(Sym::as_str)))
        .collect();
    loop {
        let mut added = false;
        for e in examples {
            for r in rules {
                if r.body.iter().all(|l| model.contains(&pattern_ground(&l.pattern, e.as_str()))) {
                    added |= model.insert(pattern_ground(&r.head, e.as_str()));
                }
            }
        }
        if !added {
            break;
        }
    }
    let holds = |model: &BTreeSet<String>, clause: &Clause, e: &Sym| match clause {
        Clause::Fact(s) => s == e,
        Clause::Rule(body) => body.iter().all(|l| match l {
            Literal::Holds(k) => model.contains(&key_ground(k, e.as_str())),
            Literal::NotAbnormal(j) => !model.contains(&format!("ab{j}({})", e.as_str())),
        }),
    };
    for (k, clauses) in h.abnormals.iter().enumerate() {
        let derived: Vec<String> = examples
            .iter()
            .filter(|e| clauses.iter().any(|c| holds(&model, c, e)))
            .map(|e| format!("ab{k}({})", e.as_str()))
            .collect();
        model.extend(derived);
    }
    examples
        .iter()
        .enumerate()
        .filter(|(_, e)| h.defaults.iter().any(|c| holds(&model, c, e)))
        .map(|(i, _)| i)
        .collect()
}

/// A small random background theory over single-variable predicates.
#[derive(Debug, Clone)]
pub struct RandomBk {
    pub examples: Vec<Sym>,
    pub facts: Vec<Atom>,
    pub rules: Vec<BkRule>,
    pub keys: Vec<FactKey>,
}

const PREDICATES: [&str; 3] = ["a", "b", "c"];

pub fn random_bk<R: Rng>(rng: &mut R, max_examples: usize) -> RandomBk {
    let n = rng.gen_range(1..=max_examples);
    let examples: Vec<Sym> = (0..n).map(|i| Sym::from(i as u64)).collect();
    let mut keys = Vec::new();
    for p in PREDICATES {
        for v in ["1", "2"] {
            keys.push(FactKey::new(p, Some(Sym::from(v)), false));
            keys.push(FactKey::new(p, Some(Sym::from(v)), true));
        }
    }
    keys.push(FactKey::new("u", None, false));
    let mut facts = Vec::new();
    for e in &examples {
        for p in PREDICATES {
            for v in ["1", "2"] {
                match rng.gen_range(0..4) {
                    0 => facts.push(Atom::new(p, vec![e.clone(), Sym::from(v)])),
                    1 => facts.push(Atom::negated(p, vec![e.clone(), Sym::from(v)])),
                    _ => {}
                }
            }
        }
        if rng.gen_bool(0.3) {
            facts.push(Atom::new("u", vec![e.clone()]));
        }
    }
    let mut rules = Vec::new();
    for r in 0..rng.gen_range(0..=2) {
        let len = rng.gen_range(1..=2);
        let body = (0..len)
            .map(|_| BodyLiteral {
                pattern: key_pattern(&keys[rng.gen_range(0..keys.len())]),
                naf: false,
            })
            .collect();
        let head = format!("d{r}");
        rules.push(BkRule {
            head: Pattern {
                predicate: head.clone(),
                args: vec![Term::Var("X".into())],
                negated: false,
            },
            body,
        });
        // later rules may build on this one
        keys.push(FactKey::new(&head, None, false));
    }
    RandomBk {
        examples,
        facts,
        rules,
        keys,
    }
}

fn key_pattern(k: &FactKey) -> Pattern {
    let mut args = vec![Term::Var("X".into())];
    if let Some(v) = &k.value {
        args.push(Term::Const(v.clone()));
    }
    Pattern {
        predicate: k.predicate.clone(),
        args,
        negated: k.negated,
    }
}

fn random_clause<R: Rng>(rng: &mut R, bk: &RandomBk, strata_below: usize) -> Clause {
    if rng.gen_bool(0.2) {
        return Clause::Fact(bk.examples[rng.gen_range(0..bk.examples.len())].clone());
    }
    let mut body = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        body.push(Literal::Holds(bk.keys[rng.gen_range(0..bk.keys.len())].clone()));
    }
    if strata_below > 0 && rng.gen_bool(0.6) {
        body.push(Literal::NotAbnormal(rng.gen_range(0..strata_below)));
    }
    Clause::Rule(body)
}

/// A stratified hypothesis with at most `max_strata` strata, the target
/// stratum included.
pub fn random_hypothesis<R: Rng>(rng: &mut R, bk: &RandomBk, max_strata: usize) -> Hypothesis {
    let m = rng.gen_range(0..max_strata);
    let abnormals = (0..m)
        .map(|k| (0..rng.gen_range(1..=2)).map(|_| random_clause(rng, bk, k)).collect())
        .collect();
    let defaults = (0..rng.gen_range(1..=3)).map(|_| random_clause(rng, bk, m)).collect();
    Hypothesis::new("t", defaults, abnormals).expect("stratified by construction")
}

/// Random positive/negative split of the examples.
pub fn random_labels<R: Rng>(rng: &mut R, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.gen_bool(0.5)).collect()
}

/// Random instance in which no positive shares its fact set with a
/// negative, so some hypothesis separates the classes.
pub fn random_separable<R: Rng>(rng: &mut R, max_examples: usize) -> (RandomBk, Vec<bool>) {
    loop {
        let bk = random_bk(rng, max_examples);
        let labels = random_labels(rng, bk.examples.len());
        let signature = |i: usize| {
            let e = &bk.examples[i];
            let mut s: Vec<String> = bk
                .facts
                .iter()
                .filter(|a| &a.args[0] == e)
                .map(|a| ground(&a.predicate, a.negated, "_", a.args.get(1).map(Sym::as_str)))
                .collect();
            s.sort();
            s
        };
        let clash = (0..labels.len())
            .any(|i| labels[i] && (0..labels.len()).any(|j| !labels[j] && signature(i) == signature(j)));
        if !clash {
            return (bk, labels);
        }
    }
}

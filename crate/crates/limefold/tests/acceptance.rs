//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary so the lines always reach the terminal.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use limefold_core::discretize::{interval_of, mdl_cut_points};
use limefold_core::fold::{information_gain, Knowledge};
use limefold_core::lime::{explain, Condition, PerturbationModel};
use limefold_core::{DataRow, Dataset, DiscretizationMap, Encoding, FeatureSpec, LimeConfig, Schema, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_limefold")
}

fn tweety() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let program = dir.path().join("tweety.pl");
    std::fs::write(&program, limefold::bundled::TWEETY).unwrap();
    let start = Instant::now();
    let out = Command::new(bin()).arg("induce").arg(&program).output().unwrap();
    let elapsed = start.elapsed();
    let text = String::from_utf8_lossy(&out.stdout);
    let expected = "fly(X) :- bird(X), not ab0(X).\nab0(X) :- penguin(X).\n";
    outcome(
        out.status.success() && text == expected && elapsed < Duration::from_secs(1),
        format!("{:?} in {:.3}s", text.trim_end(), elapsed.as_secs_f64()),
    )
}

fn gain_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut mismatched_infinities = 0;
    for _ in 0..10_000 {
        let p0 = rng.gen_range(0..=300);
        let n0 = rng.gen_range(0..=300);
        let p1 = rng.gen_range(0..=p0);
        let n1 = rng.gen_range(0..=n0);
        let got = information_gain(p0, n0, p1, n1, p1);
        let want = support::gain_oracle(p0, n0, p1, n1, p1);
        if want.is_infinite() || got.is_infinite() {
            mismatched_infinities += (got != want) as usize;
        } else {
            worst = worst.max((got - want).abs());
        }
    }
    outcome(
        worst <= 1e-12 && mismatched_infinities == 0,
        format!("10000 tuples, max abs error {worst:.2e}"),
    )
}

fn coverage_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases = 2000;
    let mut failures = 0;
    for _ in 0..cases {
        let bk = support::random_bk(&mut rng, 12);
        let h = support::random_hypothesis(&mut rng, &bk, 3);
        let kb = Knowledge::new(&bk.examples, &bk.facts, &bk.rules, &Default::default()).unwrap();
        let got: Vec<usize> = kb.covers(&h).iter().collect();
        let want: Vec<usize> = support::coverage_oracle(&bk.examples, &bk.facts, &bk.rules, &h)
            .into_iter()
            .collect();
        failures += (got != want) as usize;
    }
    outcome(failures == 0, format!("{cases} hypotheses, {failures} disagreements"))
}

fn mdlp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cases = 1000;
    let mut failures = 0;
    let mut with_cuts = 0;
    for _ in 0..cases {
        let n = rng.gen_range(0..=20);
        // labels follow a threshold with some noise, so splits are common
        let threshold = rng.gen_range(0..10);
        let noise = rng.gen_range(0.0..0.5);
        let points: Vec<(f64, bool)> = (0..n)
            .map(|_| {
                let v = rng.gen_range(0..10);
                (v as f64 * 0.25, (v >= threshold) ^ rng.gen_bool(noise))
            })
            .collect();
        let got = mdl_cut_points(&points);
        with_cuts += !got.is_empty() as usize;
        failures += (got != support::mdlp_oracle(&points)) as usize;
    }
    outcome(
        failures == 0,
        format!("{cases} sets ({with_cuts} with cuts), {failures} disagreements"),
    )
}

fn linear_recovery() -> Outcome {
    let cuts = vec![2.5, 5.0, 7.5];
    let features: Vec<FeatureSpec> = (0..5).map(|j| FeatureSpec::numeric(format!("f{j}"))).collect();
    let schema = Schema::new(features, "y", "yes", None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<DataRow> = (0..200u64)
        .map(|id| DataRow {
            id,
            values: (0..5).map(|_| Value::Number(rng.gen_range(0.0..10.0))).collect(),
            label: id % 2 == 0,
        })
        .collect();
    let ds = Dataset::new(schema.clone(), rows).unwrap();
    let mut map = DiscretizationMap::new();
    for j in 0..5 {
        map.insert(format!("f{j}"), cuts.clone()).unwrap();
    }
    let enc = Encoding::new(schema, map);
    let pm = PerturbationModel::fit(&enc, &ds);
    let row = &ds.rows()[0];
    let x = enc.model_row(row);
    let coefficients = [0.30, -0.20, 0.12, 0.07, -0.04];
    // linear in "same interval as x" indicators, computed independently
    let model = |r: &[f64]| {
        0.4 + (0..5)
            .map(|j| coefficients[j] * (interval_of(&cuts, r[j]) == interval_of(&cuts, x[j])) as u8 as f64)
            .sum::<f64>()
    };
    let config = LimeConfig {
        samples: 5000,
        explanation_len: 3,
        ridge: 1e-4,
        ..LimeConfig::default()
    };
    let e = explain(&model, &enc, &pm, row, &config).unwrap();
    let mut worst: f64 = 0.0;
    let mut names = Vec::new();
    for (rank, pair) in e.pairs.iter().enumerate() {
        let Condition::Interval { feature, .. } = &pair.condition else {
            return outcome(false, "unexpected condition kind");
        };
        names.push(feature.clone());
        if *feature != format!("f{rank}") {
            return outcome(false, format!("top features {names:?}"));
        }
        worst = worst.max((pair.weight - coefficients[rank]).abs() / coefficients[rank].abs());
    }
    outcome(
        e.pairs.len() == 3 && worst <= 1e-3,
        format!("top-3 {names:?}, max relative error {worst:.2e}"),
    )
}

/// Runs `reproduce` and returns the output directory and wall time.
fn reproduce(name: &str, out: &Path) -> Result<Duration, String> {
    let start = Instant::now();
    let status = Command::new(bin())
        .args(["reproduce", name, "--seed", "42", "--out"])
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    Ok(start.elapsed())
}

/// `(variant -> (mean f1, mean rules))` from a report.
fn means(dir: &Path) -> BTreeMap<String, (f64, f64)> {
    let text = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|c| c[2] == "mean")
        .map(|c| (c[1].to_string(), (c[6].parse().unwrap(), c[7].parse().unwrap())))
        .collect()
}

fn program_rules(dir: &Path) -> usize {
    std::fs::read_to_string(dir.join("program.pl"))
        .unwrap()
        .lines()
        .filter(|l| l.contains(":-"))
        .count()
}

/// Fit lines that miss a positive or cover a negative, and the total.
fn inexact_fits(dir: &Path) -> (usize, usize) {
    let text = std::fs::read_to_string(dir.join("fit.csv")).unwrap();
    let rows: Vec<Vec<usize>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(4).map(|c| c.parse().unwrap()).collect())
        .collect();
    let bad = rows.iter().filter(|r| r[0] != r[1] || r[3] != 0).count();
    (bad, rows.len())
}

fn files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "timing.csv" {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn main() {
    let work = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "tweety program", tweety()),
        (2, "information-gain oracle", gain_oracle()),
        (3, "coverage oracle", coverage_oracle()),
        (4, "MDLP oracle", mdlp_oracle()),
        (5, "local linear recovery", linear_recovery()),
    ];

    let mut runs = BTreeMap::new();
    for name in ["heart", "breast-w", "voting"] {
        let dir = work.path().join(name);
        runs.insert(name, (reproduce(name, &dir), dir));
    }
    let heart_again = work.path().join("heart-again");
    let second = reproduce("heart", &heart_again);

    let heart = match &runs["heart"] {
        (Ok(t), dir) => {
            let f1 = means(dir)["lime-fold"].0;
            let rules = program_rules(dir);
            outcome(
                (0.68..=0.88).contains(&f1) && rules <= 10 && t.as_secs_f64() < 60.0,
                format!("F1 {f1:.4}, whole-data program {rules} rules, {:.1}s", t.as_secs_f64()),
            )
        }
        (Err(e), _) => outcome(false, e.clone()),
    };
    results.push((6, "heart reproduction", heart));

    let others = match (&runs["breast-w"], &runs["voting"]) {
        ((Ok(_), b), (Ok(_), v)) => {
            let (fb, fv) = (means(b)["lime-fold"].0, means(v)["lime-fold"].0);
            outcome(fb >= 0.82 && fv >= 0.87, format!("breast-w F1 {fb:.4}, voting F1 {fv:.4}"))
        }
        _ => outcome(false, "reproduction failed"),
    };
    results.push((7, "breast-w and voting", others));

    let mut concise = true;
    let mut detail = Vec::new();
    let mut fits_bad = 0;
    let mut fits_total = 0;
    for (name, (run, dir)) in &runs {
        if run.is_err() {
            concise = false;
            continue;
        }
        let m = means(dir);
        let (lf, foil) = (m["lime-fold"].1, m["foil"].1);
        concise &= lf <= foil;
        detail.push(format!("{name} {lf:.1} vs {foil:.1}"));
        let (bad, total) = inexact_fits(dir);
        fits_bad += bad;
        fits_total += total;
    }
    results.push((8, "conciseness against FOIL", outcome(concise, detail.join(", "))));
    results.push((
        9,
        "training-set completeness",
        outcome(
            fits_total > 0 && fits_bad == 0,
            format!("{fits_total} hypotheses checked, {fits_bad} inexact"),
        ),
    ));

    let determinism = match (&runs["heart"], &second) {
        ((Ok(_), a), Ok(_)) => {
            let (x, y) = (files(a), files(&heart_again));
            let differing: Vec<_> = x
                .keys()
                .chain(y.keys())
                .filter(|k| x.get(*k) != y.get(*k))
                .map(|k| k.display().to_string())
                .collect();
            outcome(
                differing.is_empty() && !x.is_empty(),
                if differing.is_empty() {
                    format!("{} files identical", x.len())
                } else {
                    format!("differing: {differing:?}")
                },
            )
        }
        _ => outcome(false, "reproduction failed"),
    };
    results.push((10, "determinism", determinism));

    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag}: {name}: {}", o.detail);
        failed += !o.pass as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

//! Parallel cross-validation and report rendering.

use std::fmt::Write as _;
use std::time::Instant;

use limefold_core::eval::{stratified_folds, CvReport, FoldOutcome, TrainingFit};
use limefold_core::gbt::FeatureImportance;
use limefold_core::lime::{explain, PerturbationModel};
use limefold_core::pipeline::{self, Explainer, InductionRun};
use limefold_core::{
    DataRow, Dataset, Encoding, Explanation, GbtModel, Hypothesis, LimeConfig, Metrics, PipelineConfig,
    PipelineError, Variant,
};
use rayon::prelude::*;

use crate::bundled;

/// Explains rows on the rayon pool. Every row owns its random stream, so the
/// output equals the serial explainer's.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParallelExplainer;

impl Explainer for ParallelExplainer {
    fn explain_rows(
        &self,
        model: &GbtModel,
        encoding: &Encoding,
        perturbation: &PerturbationModel,
        rows: &[DataRow],
        config: &LimeConfig,
    ) -> Result<Vec<Explanation>, limefold_core::lime::LimeError> {
        rows.par_iter()
            .map(|r| explain(model, encoding, perturbation, r, config))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct FoldArtifacts {
    pub outcome: FoldOutcome,
    pub hypothesis: Hypothesis,
    pub fit_before_pruning: TrainingFit,
    pub fit: TrainingFit,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct CvRun {
    pub report: CvReport,
    pub folds: Vec<FoldArtifacts>,
}

/// Stratified `k`-fold cross-validation of one variant, folds in parallel.
pub fn cross_validate(
    dataset: &Dataset,
    name: &str,
    variant: Variant,
    folds: usize,
    seed: u64,
    config: &PipelineConfig,
) -> Result<CvRun, PipelineError> {
    let assignment = stratified_folds(&dataset.labels(), folds, seed);
    let results = assignment
        .par_iter()
        .enumerate()
        .map(|(k, test_idx)| {
            let start = Instant::now();
            let mut in_test = vec![false; dataset.len()];
            for &i in test_idx {
                in_test[i] = true;
            }
            let train_idx: Vec<usize> = (0..dataset.len()).filter(|&i| !in_test[i]).collect();
            let train = dataset.subset(&train_idx);
            let test = dataset.subset(test_idx);
            let (outcome, run) = pipeline::run_fold(&train, &test, k, variant, config, &ParallelExplainer)?;
            Ok(FoldArtifacts {
                outcome,
                hypothesis: run.hypothesis,
                fit_before_pruning: run.fit_before_pruning,
                fit: run.fit,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let report = CvReport::new(name, variant, results.iter().map(|f| f.outcome.clone()).collect());
    Ok(CvRun {
        report,
        folds: results,
    })
}

/// Induces one program from every row of `dataset`.
pub fn whole_dataset(
    dataset: &Dataset,
    variant: Variant,
    config: &PipelineConfig,
) -> Result<InductionRun, PipelineError> {
    pipeline::induce_on(dataset, variant, config, &ParallelExplainer)
}

pub const REPORT_HEADER: &str = "dataset,variant,fold,precision,recall,accuracy,f1,rules,facts";

fn metrics_cells(m: &Metrics) -> String {
    format!("{:.4},{:.4},{:.4},{:.4}", m.precision, m.recall, m.accuracy, m.f1)
}

/// One line per fold plus a `mean` line per report.
pub fn report_csv(reports: &[CvReport]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in reports {
        for f in &r.folds {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.dataset,
                r.variant,
                f.fold,
                metrics_cells(&f.metrics),
                f.rules,
                f.facts
            );
        }
        let _ = writeln!(
            out,
            "{},{},mean,{},{:.1},{:.1}",
            r.dataset,
            r.variant,
            metrics_cells(&r.mean),
            r.mean_rules,
            r.mean_facts
        );
    }
    out
}

pub fn timing_csv(runs: &[CvRun]) -> String {
    let mut out = String::from("dataset,variant,fold,seconds\n");
    for run in runs {
        for f in &run.folds {
            let _ = writeln!(
                out,
                "{},{},{},{:.3}",
                run.report.dataset, run.report.variant, f.outcome.fold, f.seconds
            );
        }
    }
    out
}

/// Gain-based feature importance of a model, strongest first.
pub fn importance_csv(importance: &FeatureImportance) -> String {
    let mut order: Vec<usize> = (0..importance.names.len()).collect();
    order.sort_by(|&a, &b| importance.gain[b].total_cmp(&importance.gain[a]).then(a.cmp(&b)));
    let mut out = String::from("feature,gain,splits\n");
    for i in order {
        let _ = writeln!(out, "{},{:.6},{}", importance.names[i], importance.gain[i], importance.splits[i]);
    }
    out
}

pub const FIT_HEADER: &str = "dataset,variant,fold,stage,positives,covered_positives,negatives,covered_negatives";

/// One training-fit line; `fold` is a fold index or `all`.
pub fn fit_line(dataset: &str, variant: Variant, fold: &str, stage: &str, fit: &TrainingFit) -> String {
    format!(
        "{dataset},{variant},{fold},{stage},{},{},{},{}\n",
        fit.positives, fit.covered_positives, fit.negatives, fit.covered_negatives
    )
}

/// Training coverage of every fold's hypothesis before and after pruning.
pub fn fit_csv(runs: &[CvRun]) -> String {
    let mut out = String::from(FIT_HEADER);
    out.push('\n');
    for run in runs {
        for f in &run.folds {
            let fold = f.outcome.fold.to_string();
            let (d, v) = (&run.report.dataset, run.report.variant);
            out.push_str(&fit_line(d, v, &fold, "unpruned", &f.fit_before_pruning));
            out.push_str(&fit_line(d, v, &fold, "pruned", &f.fit));
        }
    }
    out
}

/// Aligned plain-text table of mean scores.
pub fn text_table(reports: &[CvReport]) -> String {
    let mut out = format!(
        "{:<10} {:<10} {:>9} {:>7} {:>8} {:>6} {:>6} {:>6}\n",
        "dataset", "variant", "precision", "recall", "accuracy", "f1", "rules", "facts"
    );
    for r in reports {
        let m = &r.mean;
        let _ = writeln!(
            out,
            "{:<10} {:<10} {:>9.3} {:>7.3} {:>8.3} {:>6.3} {:>6.1} {:>6.1}",
            r.dataset, r.variant, m.precision, m.recall, m.accuracy, m.f1, r.mean_rules, r.mean_facts
        );
    }
    out
}

/// Markdown comparison of mean scores with the reference scores
/// where they exist.
pub fn markdown_summary(reports: &[CvReport], folds: usize, seed: u64) -> String {
    let mut out = format!("# Cross-validation summary\n\n{folds}-fold stratified cross-validation, seed {seed}.\n");
    let mut datasets: Vec<&str> = reports.iter().map(|r| r.dataset.as_str()).collect();
    datasets.dedup();
    for d in datasets {
        let _ = write!(
            out,
            "\n## {d}\n\n| variant | precision | recall | accuracy | F1 | rules | facts |\n|---|---|---|---|---|---|---|\n"
        );
        for r in reports.iter().filter(|r| r.dataset == d) {
            let m = &r.mean;
            let _ = writeln!(
                out,
                "| {} | {:.2} | {:.2} | {:.2} | {:.2} | {:.1} | {:.1} |",
                r.variant, m.precision, m.recall, m.accuracy, m.f1, r.mean_rules, r.mean_facts
            );
        }
        if let Some(b) = bundled::find(d) {
            let m = &b.reference;
            let _ = writeln!(
                out,
                "| lime-fold (reference) | {:.2} | {:.2} | {:.2} | {:.2} | | |",
                m.precision, m.recall, m.accuracy, m.f1
            );
        }
    }
    out
}

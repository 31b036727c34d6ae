//! The composed pipeline: discretize, train, explain, transform, induce.

use alloc::vec::Vec;

use thiserror::Error;

use crate::data::{DataRow, Dataset};
use crate::encode::Encoding;
use crate::eval::{confusion, FoldOutcome, Metrics, TrainingFit, Variant};
use crate::fold::{self, FoldError, FoldParams, Hypothesis, Knowledge};
use crate::gbt::{GbtError, GbtModel, GbtParams};
use crate::ilp::{self, IlpError, IlpInstance};
use crate::lime::{self, Explanation, LimeConfig, LimeError, PerturbationModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Model(#[from] GbtError),
    #[error(transparent)]
    Explain(#[from] LimeError),
    #[error(transparent)]
    Transform(#[from] IlpError),
    #[error(transparent)]
    Induce(#[from] FoldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PipelineConfig {
    pub gbt: GbtParams,
    pub lime: LimeConfig,
    pub fold: FoldParams,
}

/// Explains a batch of rows; lets callers parallelize the explanation step.
pub trait Explainer {
    fn explain_rows(
        &self,
        model: &GbtModel,
        encoding: &Encoding,
        perturbation: &PerturbationModel,
        rows: &[DataRow],
        config: &LimeConfig,
    ) -> Result<Vec<Explanation>, LimeError>;
}

/// Explains rows one after another.
#[derive(Debug, Clone, Copy, Default)]
pub struct SerialExplainer;

impl Explainer for SerialExplainer {
    fn explain_rows(
        &self,
        model: &GbtModel,
        encoding: &Encoding,
        perturbation: &PerturbationModel,
        rows: &[DataRow],
        config: &LimeConfig,
    ) -> Result<Vec<Explanation>, LimeError> {
        lime::explain_all(model, encoding, perturbation, rows, config)
    }
}

pub fn train_model(train: &Dataset, encoding: &Encoding, params: &GbtParams) -> Result<GbtModel, GbtError> {
    GbtModel::train(
        &encoding.matrix(train),
        &train.labels(),
        encoding.column_names(),
        params,
    )
}

/// Everything produced while inducing a program from one training set.
#[derive(Debug, Clone)]
pub struct InductionRun {
    pub encoding: Encoding,
    pub model: Option<GbtModel>,
    pub explanations: Vec<Explanation>,
    pub instance: IlpInstance,
    pub unpruned: Hypothesis,
    pub hypothesis: Hypothesis,
    pub fit_before_pruning: TrainingFit,
    pub fit: TrainingFit,
}

/// Learns from an instance, keeping the hypothesis before and after
/// pruning.
pub fn learn_instance(
    instance: &IlpInstance,
    variant: Variant,
    params: &FoldParams,
) -> Result<(Hypothesis, Hypothesis, TrainingFit, TrainingFit), FoldError> {
    let kb = Knowledge::new(
        &instance.examples(),
        &instance.facts,
        &instance.rules,
        &instance.negative_weight_facts(),
    )?;
    let pos = kb.set_of(&instance.positives);
    let neg = kb.set_of(&instance.negatives);
    let unpruned = match variant {
        Variant::Foil => fold::foil(&kb, &pos, &neg, &instance.target, params)?,
        _ => fold::fold(&kb, &pos, &neg, &instance.target, params)?,
    };
    let hypothesis = if params.prune && variant != Variant::Foil {
        fold::prune_hypothesis(&kb, &unpruned, &pos, &neg, params.negative_tolerance)
    } else {
        unpruned.clone()
    };
    let before = TrainingFit::measure(&kb, &unpruned, &pos, &neg);
    let after = TrainingFit::measure(&kb, &hypothesis, &pos, &neg);
    Ok((unpruned, hypothesis, before, after))
}

/// Runs one variant on a training set.
pub fn induce_on<E: Explainer + ?Sized>(
    train: &Dataset,
    variant: Variant,
    config: &PipelineConfig,
    explainer: &E,
) -> Result<InductionRun, PipelineError> {
    let encoding = Encoding::fit(train);
    let target = ilp::target_name(train);
    let (model, explanations, instance) = match variant {
        Variant::LimeFold => {
            config.lime.validate()?;
            let model = train_model(train, &encoding, &config.gbt)?;
            let perturbation = PerturbationModel::fit(&encoding, train);
            let explanations =
                explainer.explain_rows(&model, &encoding, &perturbation, train.rows(), &config.lime)?;
            let instance = ilp::transform(train, &encoding, &explanations, &target)?;
            (Some(model), explanations, instance)
        }
        Variant::Fold | Variant::Foil => (None, Vec::new(), ilp::full_instance(train, &encoding, &target)),
    };
    let (unpruned, hypothesis, fit_before_pruning, fit) = learn_instance(&instance, variant, &config.fold)?;
    Ok(InductionRun {
        encoding,
        model,
        explanations,
        instance,
        unpruned,
        hypothesis,
        fit_before_pruning,
        fit,
    })
}

/// The full LIME-FOLD composition on one training set, serially.
pub fn lime_fold(train: &Dataset, config: &PipelineConfig) -> Result<InductionRun, PipelineError> {
    induce_on(train, Variant::LimeFold, config, &SerialExplainer)
}

/// Trains on `train` and scores on `test` against its true labels. Test
/// rows are described by their full encoding.
pub fn run_fold<E: Explainer + ?Sized>(
    train: &Dataset,
    test: &Dataset,
    fold: usize,
    variant: Variant,
    config: &PipelineConfig,
    explainer: &E,
) -> Result<(FoldOutcome, InductionRun), PipelineError> {
    let run = induce_on(train, variant, config, explainer)?;
    let test_instance = ilp::full_instance(test, &run.encoding, &run.instance.target);
    let c = confusion(&run.hypothesis, &test_instance)?;
    let outcome = FoldOutcome {
        fold,
        metrics: Metrics::from_confusion(&c),
        confusion: c,
        rules: run.hypothesis.rule_count(),
        facts: run.hypothesis.fact_count(),
    };
    Ok((outcome, run))
}

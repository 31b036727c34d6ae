//! Command-line interface.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use limefold_core::discretize::discretize_all;
use limefold_core::fold::{self, Knowledge};
use limefold_core::ilp::{self, FactSource};
use limefold_core::lime::PerturbationModel;
use limefold_core::pipeline::{train_model, Explainer};
use limefold_core::{
    Dataset, DiscretizationMap, Encoding, FoldParams, GbtModel, GbtParams, LimeConfig, PipelineConfig, Variant,
};

use limefold::harness::{self, ParallelExplainer};
use limefold::{bundled, io};

/// Raised for invalid invocations; everything else is a data error.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "limefold", version, about = "Explain boosted trees with induced default theories")]
pub struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute MDLP cut points for every numeric feature.
    Discretize {
        #[command(flatten)]
        input: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a boosted-tree classifier on the binarized data.
    Train {
        #[command(flatten)]
        input: DataArgs,
        #[command(flatten)]
        gbt: GbtArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Explain the model's decision on rows of the data.
    Explain {
        #[command(flatten)]
        input: DataArgs,
        #[arg(long)]
        model: PathBuf,
        /// Cut points from `discretize`; computed from the data when absent.
        #[arg(long)]
        discretization: Option<PathBuf>,
        /// Only explain these row ids.
        #[arg(long, value_delimiter = ',')]
        rows: Vec<u64>,
        #[command(flatten)]
        lime: LimeArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn explanations into a logic program with examples.
    Transform {
        #[command(flatten)]
        input: DataArgs,
        #[arg(long)]
        explanations: PathBuf,
        #[arg(long)]
        discretization: Option<PathBuf>,
        /// Target predicate; defaults to the label column name.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the fact provenance sidecar.
        #[arg(long)]
        provenance: Option<PathBuf>,
    },
    /// Induce a hypothesis from a program file.
    Induce {
        program: PathBuf,
        /// Provenance sidecar marking negative-weight facts.
        #[arg(long)]
        provenance: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Algorithm::Fold)]
        algorithm: Algorithm,
        #[command(flatten)]
        fold: FoldArgs,
        /// Also print per-clause coverage as JSON to this file.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate pipeline variants on a dataset.
    Evaluate {
        /// A bundled dataset name, instead of --data/--schema.
        #[arg(long, conflicts_with_all = ["data", "schema"])]
        dataset: Option<String>,
        #[arg(long, requires = "schema")]
        data: Option<PathBuf>,
        #[arg(long, requires = "data")]
        schema: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![VariantArg::LimeFold])]
        variants: Vec<VariantArg>,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full protocol on a bundled dataset and write every artifact.
    Reproduce {
        dataset: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![VariantArg::LimeFold, VariantArg::Fold, VariantArg::Foil])]
        variants: Vec<VariantArg>,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Fold,
    Foil,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    LimeFold,
    Fold,
    Foil,
}

impl std::fmt::Display for VariantArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(Variant::from(*self).name())
    }
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::LimeFold => Variant::LimeFold,
            VariantArg::Fold => Variant::Fold,
            VariantArg::Foil => Variant::Foil,
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        Ok(io::load_dataset(&self.data, &self.schema)?)
    }
}

#[derive(Debug, Args)]
pub struct GbtArgs {
    #[arg(long, default_value_t = GbtParams::default().rounds)]
    pub rounds: usize,
    #[arg(long, default_value_t = GbtParams::default().max_depth)]
    pub max_depth: usize,
    #[arg(long, default_value_t = GbtParams::default().learning_rate)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = GbtParams::default().min_child_weight)]
    pub min_child_weight: f64,
    #[arg(long, default_value_t = GbtParams::default().lambda)]
    pub lambda: f64,
}

impl GbtArgs {
    fn params(&self) -> GbtParams {
        GbtParams {
            rounds: self.rounds,
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            min_child_weight: self.min_child_weight,
            lambda: self.lambda,
        }
    }
}

#[derive(Debug, Args)]
pub struct LimeArgs {
    #[arg(long, default_value_t = LimeConfig::default().samples)]
    pub samples: usize,
    #[arg(long, default_value_t = LimeConfig::default().explanation_len)]
    pub explanation_len: usize,
    /// Kernel width; 0.75 * sqrt(d) when absent.
    #[arg(long)]
    pub kernel_width: Option<f64>,
    #[arg(long, default_value_t = LimeConfig::default().perturb_probability)]
    pub perturb_probability: f64,
    #[arg(long, default_value_t = LimeConfig::default().ridge)]
    pub ridge: f64,
}

impl LimeArgs {
    fn config(&self, seed: u64) -> LimeConfig {
        LimeConfig {
            samples: self.samples,
            explanation_len: self.explanation_len,
            kernel_width: self.kernel_width,
            perturb_probability: self.perturb_probability,
            ridge: self.ridge,
            seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct FoldArgs {
    #[arg(long, default_value_t = FoldParams::default().max_rule_length)]
    pub max_rule_length: usize,
    #[arg(long, default_value_t = FoldParams::default().max_exception_depth)]
    pub max_exception_depth: usize,
    #[arg(long, default_value_t = FoldParams::default().literal_cost)]
    pub literal_cost: f64,
    #[arg(long, default_value_t = FoldParams::default().fact_cost)]
    pub fact_cost: f64,
    #[arg(long)]
    pub no_prune: bool,
    #[arg(long, default_value_t = FoldParams::default().negative_tolerance)]
    pub negative_tolerance: usize,
}

impl FoldArgs {
    fn params(&self) -> FoldParams {
        FoldParams {
            max_rule_length: self.max_rule_length,
            max_exception_depth: self.max_exception_depth,
            literal_cost: self.literal_cost,
            fact_cost: self.fact_cost,
            prune: !self.no_prune,
            negative_tolerance: self.negative_tolerance,
        }
    }
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub gbt: GbtArgs,
    #[command(flatten)]
    pub lime: LimeArgs,
    #[command(flatten)]
    pub fold: FoldArgs,
}

impl PipelineArgs {
    fn config(&self, seed: u64) -> PipelineConfig {
        PipelineConfig {
            gbt: self.gbt.params(),
            lime: self.lime.config(seed),
            fold: self.fold.params(),
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => io::write_text(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn encoding_for(dataset: &Dataset, map: Option<&Path>) -> Result<Encoding> {
    Ok(match map {
        Some(p) => Encoding::new(dataset.schema().clone(), io::read_discretization(p)?),
        None => Encoding::fit(dataset),
    })
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_DATA
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.jobs {
        Some(0) => Err(UsageError("--jobs must be at least 1".into()).into()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| anyhow::anyhow!("building thread pool: {e}"))?
            .install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Discretize { input, out } => {
            let ds = input.load()?;
            emit(out.as_deref(), &io::to_json(&discretize_all(&ds)))
        }
        Command::Train { input, gbt, out } => {
            let ds = input.load()?;
            let encoding = Encoding::new(ds.schema().clone(), DiscretizationMap::new());
            let model = train_model(&ds, &encoding, &gbt.params())?;
            io::write_json(&out, &model)?;
            Ok(())
        }
        Command::Explain {
            input,
            model,
            discretization,
            rows,
            lime,
            seed,
            out,
        } => {
            let ds = input.load()?;
            let model: GbtModel = io::read_json(&model)?;
            let encoding = encoding_for(&ds, discretization.as_deref())?;
            if model.feature_names != encoding.column_names() {
                bail!("model was trained on different columns than the schema describes");
            }
            let config = lime.config(seed);
            config.validate().map_err(|e| UsageError(e.to_string()))?;
            let perturbation = PerturbationModel::fit(&encoding, &ds);
            let selected: Vec<_> = if rows.is_empty() {
                ds.rows().to_vec()
            } else {
                let wanted: std::collections::BTreeSet<u64> = rows.iter().copied().collect();
                let picked: Vec<_> = ds.rows().iter().filter(|r| wanted.contains(&r.id)).cloned().collect();
                if picked.len() != wanted.len() {
                    bail!("some requested row ids are not in the data");
                }
                picked
            };
            let explanations = ParallelExplainer.explain_rows(&model, &encoding, &perturbation, &selected, &config)?;
            emit(out.as_deref(), &io::explanations_to_jsonl(&explanations))
        }
        Command::Transform {
            input,
            explanations,
            discretization,
            target,
            out,
            provenance,
        } => {
            let ds = input.load()?;
            let encoding = encoding_for(&ds, discretization.as_deref())?;
            let text = io::read_text(&explanations)?;
            let explanations = io::parse_jsonl_explanations(&text, &explanations.display().to_string())?;
            let target = target.unwrap_or_else(|| ilp::target_name(&ds));
            let instance = ilp::transform(&ds, &encoding, &explanations, &target)?;
            if let Some(p) = provenance {
                io::write_json(&p, &instance.provenance)?;
            }
            emit(out.as_deref(), &ilp::emit_program(&instance))
        }
        Command::Induce {
            program,
            provenance,
            algorithm,
            fold: fold_args,
            stats,
            out,
        } => {
            let params = fold_args.params();
            params.validate().map_err(|e| UsageError(e.to_string()))?;
            let mut instance = io::parse_program(&io::read_text(&program)?, &program.display().to_string())?;
            if let Some(p) = provenance {
                let sources: Vec<FactSource> = io::read_provenance(&p)?;
                instance.provenance = sources;
            }
            let kb = Knowledge::new(
                &instance.examples(),
                &instance.facts,
                &instance.rules,
                &instance.negative_weight_facts(),
            )?;
            let pos = kb.set_of(&instance.positives);
            let neg = kb.set_of(&instance.negatives);
            let h = match algorithm {
                Algorithm::Fold => fold::induce(&kb, &pos, &neg, &instance.target, &params)?,
                Algorithm::Foil => fold::foil(&kb, &pos, &neg, &instance.target, &params)?,
            };
            if let Some(p) = stats {
                io::write_json(&p, &h.clause_statistics(&kb, &pos, &neg))?;
            }
            emit(out.as_deref(), &h.to_string())
        }
        Command::Evaluate {
            dataset,
            data,
            schema,
            variants,
            folds,
            seed,
            pipeline,
            out,
        } => {
            let (name, ds) = match (dataset, data, schema) {
                (Some(name), _, _) => (name.clone(), load_bundled(&name)?),
                (None, Some(d), Some(s)) => {
                    let name = d.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
                    (name, io::load_dataset(&d, &s)?)
                }
                _ => return Err(UsageError("give --dataset or both --data and --schema".into()).into()),
            };
            check_folds(folds, &ds)?;
            let config = pipeline.config(seed);
            let runs = variants
                .iter()
                .map(|&v| harness::cross_validate(&ds, &name, v.into(), folds, seed, &config))
                .collect::<Result<Vec<_>, _>>()?;
            let reports: Vec<_> = runs.iter().map(|r| r.report.clone()).collect();
            print!("{}", harness::text_table(&reports));
            if let Some(dir) = out {
                io::write_text(&dir.join("report.csv"), &harness::report_csv(&reports))?;
                io::write_text(&dir.join("timing.csv"), &harness::timing_csv(&runs))?;
                io::write_text(&dir.join("summary.md"), &harness::markdown_summary(&reports, folds, seed))?;
                io::write_text(&dir.join("fit.csv"), &harness::fit_csv(&runs))?;
            }
            Ok(())
        }
        Command::Reproduce {
            dataset,
            seed,
            folds,
            variants,
            pipeline,
            out,
        } => {
            let ds = load_bundled(&dataset)?;
            check_folds(folds, &ds)?;
            let config = pipeline.config(seed);
            reproduce(&dataset, &ds, &variants, folds, seed, &config, &out)
        }
    }
}

fn check_folds(folds: usize, ds: &Dataset) -> Result<()> {
    if folds < 2 || folds > ds.len() {
        return Err(UsageError(format!("--folds must lie in 2..={}", ds.len())).into());
    }
    Ok(())
}

fn load_bundled(name: &str) -> Result<Dataset> {
    let Some(b) = bundled::find(name) else {
        return Err(UsageError(format!(
            "unknown dataset '{name}'; bundled datasets: {}",
            bundled::names().join(", ")
        ))
        .into());
    };
    Ok(b.load()?)
}

fn reproduce(
    name: &str,
    ds: &Dataset,
    variants: &[VariantArg],
    folds: usize,
    seed: u64,
    config: &PipelineConfig,
    out: &Path,
) -> Result<()> {
    let mut runs = Vec::new();
    for &v in variants {
        let variant: Variant = v.into();
        let run = harness::cross_validate(ds, name, variant, folds, seed, config)?;
        for f in &run.folds {
            let path = out.join("programs").join(variant.name()).join(format!("fold-{}.pl", f.outcome.fold));
            io::write_text(&path, &f.hypothesis.to_string())?;
        }
        runs.push(run);
    }
    let reports: Vec<_> = runs.iter().map(|r| r.report.clone()).collect();
    io::write_text(&out.join("report.csv"), &harness::report_csv(&reports))?;
    io::write_text(&out.join("timing.csv"), &harness::timing_csv(&runs))?;
    io::write_text(&out.join("summary.md"), &harness::markdown_summary(&reports, folds, seed))?;

    let whole = harness::whole_dataset(ds, Variant::LimeFold, config)?;
    io::write_text(&out.join("program.pl"), &whole.hypothesis.to_string())?;
    let mut fits = harness::fit_csv(&runs);
    fits.push_str(&harness::fit_line(name, Variant::LimeFold, "all", "unpruned", &whole.fit_before_pruning));
    fits.push_str(&harness::fit_line(name, Variant::LimeFold, "all", "pruned", &whole.fit));
    io::write_text(&out.join("fit.csv"), &fits)?;
    let kb = Knowledge::new(
        &whole.instance.examples(),
        &whole.instance.facts,
        &whole.instance.rules,
        &whole.instance.negative_weight_facts(),
    )?;
    let stats = whole.hypothesis.clause_statistics(
        &kb,
        &kb.set_of(&whole.instance.positives),
        &kb.set_of(&whole.instance.negatives),
    );
    io::write_json(&out.join("program.json"), &stats)?;
    io::write_text(&out.join("instance.pl"), &ilp::emit_program(&whole.instance))?;
    if let Some(model) = &whole.model {
        io::write_text(&out.join("importance.csv"), &harness::importance_csv(&model.feature_importance()))?;
    }

    print!("{}", harness::text_table(&reports));
    println!("\nwhole-dataset program ({} rules, {} facts):", whole.hypothesis.rule_count(), whole.hypothesis.fact_count());
    print!("{}", whole.hypothesis);
    Ok(())
}

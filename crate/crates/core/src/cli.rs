//! Command-line front end: `encode`, `fit`, `predict`, `rules`, `eval`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or model error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::{self, load_csv, variance_select, Dataset, Ternary};
use crate::em::{em_phase1, fit_mbnb_em, EmConfig, EmTrace};
use crate::error::Error;
use crate::eval::{run_benchmark, write_report, BenchmarkConfig, MbnbImputation, ModelKind};
use crate::kg_encoder::{encode_individuals, entail, generate_features, parse_kb, Feature, KnowledgeBase};
use crate::mbnb::{self, decide, Verdict};
use crate::mixture_hbm::{fit_hbm, hbm_posterior, select_k, HbmVariant};
use crate::model_io::{self, Model};
use crate::rules;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "kgbayes", version, about = "Bayesian classifiers for knowledge-base individuals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode every individual of a knowledge base as a ternary CSV row.
    Encode(EncodeArgs),
    /// Fit a classifier on a labeled ternary CSV.
    Fit(FitArgs),
    /// Add posterior and decision columns to a ternary CSV.
    Predict(PredictArgs),
    /// Extract an approximate axiom and probabilistic rules from a model.
    Rules(RulesArgs),
    /// Cross-validate the classifiers on problems generated from a knowledge base.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct EncodeArgs {
    /// Knowledge base in the line-oriented assertion format.
    kb: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Add a label column holding membership in this class; the class is
    /// dropped from the features.
    #[arg(long)]
    label: Option<String>,
    /// Drop features whose known-cell variance does not exceed this value.
    #[arg(long)]
    variance_cutoff: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CliModel {
    Mbnb,
    MbnbEm,
    Hbm,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Imputation {
    Marginalize,
    Constant,
    Em,
    Mixture,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CliVariant {
    Pipeline,
    ClassConditional,
}

impl From<CliVariant> for HbmVariant {
    fn from(v: CliVariant) -> Self {
        match v {
            CliVariant::Pipeline => HbmVariant::Pipeline,
            CliVariant::ClassConditional => HbmVariant::ClassConditional,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct EmArgs {
    /// Relative log-likelihood change that stops EM.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl EmArgs {
    fn config(&self) -> Result<EmConfig, CliError> {
        let cfg = EmConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Labeled ternary CSV.
    data: PathBuf,
    #[arg(long, value_enum, default_value = "mbnb")]
    model: CliModel,
    #[arg(short, long)]
    output: PathBuf,
    /// Pseudo-count added to every count.
    #[arg(long, default_value_t = mbnb::DEFAULT_ALPHA)]
    alpha: f64,
    /// Treatment of Unknown inputs; `em` and `mixture` are implied by the
    /// mbnb-em and hbm models.
    #[arg(long, value_enum)]
    imputation: Option<Imputation>,
    /// Number of mixture components (hbm); chosen by BIC over --k-grid when absent.
    #[arg(long)]
    k: Option<usize>,
    /// Candidate component counts, e.g. `2..10` or `2,4,8`.
    #[arg(long, default_value = "2..10")]
    k_grid: String,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, value_enum, default_value = "pipeline")]
    variant: CliVariant,
    /// Write the EM objective per iteration to this CSV (mbnb-em).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Only impute missing inputs of the labeled rows (mbnb-em); unlabeled
    /// rows are ignored instead of receiving soft labels.
    #[arg(long)]
    phase1_only: bool,
    #[command(flatten)]
    em: EmArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    model: PathBuf,
    data: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Posterior threshold for a definite decision; 0.5 never rejects.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
}

#[derive(Args, Debug)]
struct RulesArgs {
    model: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    theta: f64,
    #[arg(short, long)]
    output: PathBuf,
    /// Name of the target class in the rendered text.
    #[arg(long, default_value = "C")]
    target: String,
    /// Labeled CSV used to link mixture components to the target (hbm).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Show only the more probable literal of each feature.
    #[arg(long)]
    simplified: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    kb: PathBuf,
    /// Comma-separated models to compare.
    #[arg(long, value_delimiter = ',', value_enum, default_values = ["mbnb", "mbnb-em", "hbm"])]
    models: Vec<CliModel>,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 10)]
    problems: usize,
    #[arg(long, default_value_t = 10)]
    min_pos: usize,
    #[arg(long, default_value_t = 10)]
    min_neg: usize,
    #[arg(long, default_value_t = mbnb::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value = "2..10")]
    k_grid: String,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0.0)]
    variance_cutoff: f64,
    #[arg(long, value_enum, default_value = "pipeline")]
    variant: CliVariant,
    /// Unknown-input treatment of the plain mbnb model.
    #[arg(long, value_enum, default_value = "constant")]
    imputation: Imputation,
    #[command(flatten)]
    em: EmArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(Error::Io(e))
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Data(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

fn read_csv(path: &Path) -> Result<Dataset, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Data(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))))?;
    Ok(load_csv(BufReader::new(file))?)
}

fn read_kb(path: &Path) -> Result<KnowledgeBase, CliError> {
    Ok(parse_kb(&read_text(path)?)?)
}

/// Parses `a..b` (inclusive), a comma list, or a single value.
fn parse_k_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || usage(format!("invalid K grid `{s}` (expected e.g. 2..10 or 2,4,8)"));
    let grid: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if grid.is_empty() || grid.contains(&0) {
        return Err(bad());
    }
    Ok(grid)
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--alpha {alpha} must be a finite value >= 0")))
    }
}

fn check_at_least(name: &str, value: usize, min: usize) -> Result<(), CliError> {
    if value >= min {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be at least {min}")))
    }
}

fn encode(args: EncodeArgs) -> Result<(), CliError> {
    if let Some(c) = args.variance_cutoff {
        if !(0.0..=0.25).contains(&c) {
            return Err(usage(format!("--variance-cutoff {c} is outside [0, 0.25]")));
        }
    }
    let kb = read_kb(&args.kb)?;
    let mut features = generate_features(&kb);
    if let Some(label) = &args.label {
        if !kb.classes().contains(label) {
            return Err(Error::Lookup {
                kind: "class",
                name: label.clone(),
            }
            .into());
        }
        features.retain(|f| *f != Feature::NamedClass(label.clone()));
    }
    let mut ds = encode_individuals(&kb, &features)?;
    if let Some(label) = &args.label {
        let target = Feature::NamedClass(label.clone());
        let labels = kb
            .individuals()
            .iter()
            .map(|a| entail(&kb, a, &target))
            .collect::<crate::Result<Vec<_>>>()?;
        ds = ds.with_labels(labels)?;
    }
    if let Some(c) = args.variance_cutoff {
        ds = variance_select(&ds, c)?;
    }
    ds.write_csv(File::create(&args.output)?)?;
    Ok(())
}

/// `phase,iteration,loglik` rows, iteration 0 being the starting point.
fn phased_trace(traces: &[&EmTrace]) -> String {
    let mut out = String::from("phase,");
    for (phase, trace) in traces.iter().enumerate() {
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        let header = lines.next().unwrap_or_default();
        if phase == 0 {
            out.push_str(header);
            out.push('\n');
        }
        for line in lines {
            out.push_str(&format!("{},{line}\n", phase + 1));
        }
    }
    out
}

fn fit(args: FitArgs) -> Result<(), CliError> {
    check_alpha(args.alpha)?;
    let cfg = args.em.config()?;
    let implied = match args.model {
        CliModel::Mbnb => None,
        CliModel::MbnbEm => Some(Imputation::Em),
        CliModel::Hbm => Some(Imputation::Mixture),
    };
    let imputation = match (implied, args.imputation) {
        (Some(i), None) => i,
        (Some(i), Some(j)) if i == j => i,
        (None, Some(j @ (Imputation::Marginalize | Imputation::Constant))) => j,
        (None, None) => Imputation::Marginalize,
        (_, Some(j)) => {
            return Err(usage(format!(
                "--imputation {} does not apply to --model {}",
                j.to_possible_value().expect("named").get_name(),
                args.model.to_possible_value().expect("named").get_name()
            )))
        }
    };
    if args.trace.is_some() && args.model != CliModel::MbnbEm {
        return Err(usage("--trace is only produced by --model mbnb-em"));
    }
    if args.phase1_only && args.model != CliModel::MbnbEm {
        return Err(usage("--phase1-only applies to --model mbnb-em"));
    }
    let ds = read_csv(&args.data)?;
    let model = match imputation {
        Imputation::Marginalize => Model::Mbnb(mbnb::fit_mle(&ds, args.alpha)?),
        Imputation::Constant => {
            let labels = ds.labels().ok_or_else(|| Error::Fit("dataset has no label column".into()))?;
            let x = dataset::impute_constant(&ds);
            Model::Mbnb(mbnb::fit_soft(&x, labels, args.alpha, ds.feature_names())?)
        }
        Imputation::Em if args.phase1_only => {
            let labels = ds.labels().ok_or_else(|| Error::Fit("dataset has no label column".into()))?;
            let labeled: Vec<usize> = (0..ds.n_rows()).filter(|&t| labels[t].is_known()).collect();
            let train = ds.select_rows(&labeled);
            let (params, _, trace) = em_phase1(&train, &mbnb::fit_mle(&train, args.alpha)?, &cfg)?;
            if let Some(path) = &args.trace {
                fs::write(path, phased_trace(&[&trace]))?;
            }
            Model::Mbnb(params)
        }
        Imputation::Em => {
            let fitted = fit_mbnb_em(&ds, args.alpha, &cfg)?;
            if let Some(path) = &args.trace {
                fs::write(path, phased_trace(&[&fitted.phase1, &fitted.phase2]))?;
            }
            Model::Mbnb(fitted.params)
        }
        Imputation::Mixture => {
            check_at_least("restarts", args.restarts, 1)?;
            let k = match args.k {
                Some(k) => {
                    check_at_least("k", k, 1)?;
                    k
                }
                None => select_k(&ds, &parse_k_grid(&args.k_grid)?, args.restarts, &cfg)?.0,
            };
            Model::Hbm(fit_hbm(&ds, k, args.restarts, args.alpha, &cfg, args.variant.into())?)
        }
    };
    model_io::save(&model, &args.output)?;
    Ok(())
}

/// Columns of `ds` in the order of the model's features.
fn align(ds: &Dataset, features: &[String]) -> Result<Dataset, CliError> {
    let names = ds.feature_names();
    let keep = features
        .iter()
        .map(|f| {
            names.iter().position(|n| n == f).ok_or_else(|| Error::Lookup {
                kind: "feature column",
                name: f.clone(),
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(ds.select_features(&keep))
}

fn predict(args: PredictArgs) -> Result<(), CliError> {
    if !(0.5..=1.0).contains(&args.theta) {
        return Err(usage(format!("--theta {} is outside [0.5, 1]", args.theta)));
    }
    let model = model_io::load(&args.model)?;
    let ds = read_csv(&args.data)?;
    let aligned = align(&ds, model.feature_names())?;
    let posterior = |x: &[Ternary]| -> crate::Result<f64> {
        match &model {
            Model::Mbnb(m) => mbnb::posterior(m, x),
            Model::Hbm(h) => hbm_posterior(h, x),
            Model::Mixture(_) => Err(Error::Model("a mixture model has no class posterior".into())),
        }
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&args.output)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let io = |e: csv::Error| CliError::Data(Error::Io(std::io::Error::other(e)));
    let mut header = vec!["id".to_string()];
    header.extend(ds.feature_names());
    if ds.labels().is_some() {
        header.push(dataset::LABEL_COLUMN.to_string());
    }
    header.extend(["posterior".to_string(), "decision".to_string()]);
    w.write_record(&header).map_err(io)?;
    for t in 0..ds.n_rows() {
        let q = posterior(aligned.row(t))?;
        let verdict = match decide(q, args.theta)?.verdict {
            Verdict::Positive => "positive",
            Verdict::Negative => "negative",
            Verdict::Rejected => "rejected",
        };
        let mut record = vec![ds.row_ids()[t].clone()];
        record.extend(ds.row(t).iter().map(|v| v.token().to_string()));
        if ds.labels().is_some() {
            record.push(ds.label(t).token().to_string());
        }
        record.push(format!("{q:?}"));
        record.push(verdict.to_string());
        w.write_record(&record).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn extract_rules(args: RulesArgs) -> Result<(), CliError> {
    if !(args.theta > 0.5 && args.theta < 1.0) {
        return Err(usage(format!("--theta {} is outside (0.5, 1)", args.theta)));
    }
    let model = model_io::load(&args.model)?;
    let top = match &model {
        Model::Mbnb(m) => m,
        Model::Hbm(h) => h.top(),
        Model::Mixture(_) => return Err(Error::Model("rules need a classifier, not a bare mixture".into()).into()),
    };
    let mut body = rules::render_axiom(&rules::extract_axiom(top, &args.target, args.theta)?);
    body.push_str("\n\n");
    body.push_str(&rules::render_rule(&rules::extract_rule(top, &args.target, args.simplified)));
    body.push('\n');
    body.push_str(&rules::render_rule(&rules::extract_complement_rule(top, &args.target, args.simplified)));
    if let Model::Hbm(h) = &model {
        let Some(path) = &args.data else {
            return Err(usage("--data is required to link the components of an hbm model"));
        };
        let ds = align(&read_csv(path)?, h.top().feature_names())?;
        let set = rules::extract_disjunctive(h, &args.target, args.theta, &ds)?;
        body.push('\n');
        body.push_str(&rules::render_disjunctive(&set));
    }
    fs::write(&args.output, rules::with_header(model.kind(), args.theta, &body))?;
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), CliError> {
    check_alpha(args.alpha)?;
    check_at_least("folds", args.folds, 2)?;
    check_at_least("problems", args.problems, 1)?;
    check_at_least("restarts", args.restarts, 1)?;
    if !(0.0..=0.25).contains(&args.variance_cutoff) {
        return Err(usage(format!("--variance-cutoff {} is outside [0, 0.25]", args.variance_cutoff)));
    }
    if args.models.is_empty() {
        return Err(usage("--models needs at least one model"));
    }
    let mbnb_imputation = match args.imputation {
        Imputation::Marginalize => MbnbImputation::Marginalize,
        Imputation::Constant => MbnbImputation::Constant,
        _ => return Err(usage("--imputation for eval selects the plain mbnb treatment: marginalize or constant")),
    };
    let mut models: Vec<ModelKind> = vec![];
    for m in &args.models {
        let kind = match m {
            CliModel::Mbnb => ModelKind::Mbnb,
            CliModel::MbnbEm => ModelKind::MbnbEm,
            CliModel::Hbm => ModelKind::Hbm,
        };
        if !models.contains(&kind) {
            models.push(kind);
        }
    }
    let cfg = BenchmarkConfig {
        models,
        folds: args.folds,
        problems: args.problems,
        min_pos: args.min_pos,
        min_neg: args.min_neg,
        seed: args.em.seed,
        alpha: args.alpha,
        em: args.em.config()?,
        k_grid: parse_k_grid(&args.k_grid)?,
        restarts: args.restarts,
        variance_cutoff: args.variance_cutoff,
        hbm_variant: args.variant.into(),
        mbnb_imputation,
        ..BenchmarkConfig::default()
    };
    let kb = read_kb(&args.kb)?;
    let report = run_benchmark(&kb, &cfg)?;
    write_report(&report, &args.output)?;
    Ok(())
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Encode(a) => encode(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Rules(a) => extract_rules(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

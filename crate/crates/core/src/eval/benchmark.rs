//! Cross-validated comparison of the classifiers on generated problems.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dataset::{variance_select, Dataset, PriorStrategy, Ternary};
use crate::em::{fit_mbnb_em, EmConfig};
use crate::error::{invalid, Error, Result};
use crate::kg_encoder::{encode_individuals, generate_features, KnowledgeBase};
use crate::mbnb::{self, MbnbParams};
use crate::mixture_hbm::{fit_hbm, hbm_posterior, select_k, BicRow, HbmModel, HbmVariant};

use super::folds::stratified_kfold;
use super::metrics::{compute_metrics, FoldMetrics, MetricsReport, Summary, METRIC_NAMES};
use super::problems::{generate_problems_for, Problem, ProblemConstraints};
use super::rank_test::{friedman_nemenyi, NemenyiAlpha, RankTestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Mbnb,
    MbnbEm,
    Hbm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Mbnb, ModelKind::MbnbEm, ModelKind::Hbm];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mbnb => "mbnb",
            ModelKind::MbnbEm => "mbnb-em",
            ModelKind::Hbm => "hbm",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| invalid("model", format!("unknown model `{s}` (expected mbnb, mbnb-em or hbm)")))
    }
}

/// How the plain naive Bayes model treats Unknown inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MbnbImputation {
    /// Unknown cells are left out of the likelihood.
    Marginalize,
    /// Unknown cells are replaced by the training-fold feature frequency.
    #[default]
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub models: Vec<ModelKind>,
    pub folds: usize,
    pub problems: usize,
    pub min_pos: usize,
    pub min_neg: usize,
    pub seed: u64,
    pub alpha: f64,
    pub em: EmConfig,
    /// Candidate numbers of mixture components, chosen once per knowledge
    /// base by BIC on the unlabeled encoding.
    pub k_grid: Vec<usize>,
    pub restarts: usize,
    pub variance_cutoff: f64,
    pub hbm_variant: HbmVariant,
    pub mbnb_imputation: MbnbImputation,
    pub rank_alpha: NemenyiAlpha,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            models: ModelKind::ALL.to_vec(),
            folds: 10,
            problems: 10,
            min_pos: 10,
            min_neg: 10,
            seed: 42,
            alpha: mbnb::DEFAULT_ALPHA,
            em: EmConfig::default(),
            k_grid: crate::mixture_hbm::DEFAULT_K_RANGE.collect(),
            restarts: 10,
            variance_cutoff: 0.0,
            hbm_variant: HbmVariant::Pipeline,
            mbnb_imputation: MbnbImputation::Constant,
            rank_alpha: NemenyiAlpha::P05,
        }
    }
}

/// Per-fold metrics of one model on one problem, or why it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOutcome {
    pub model: ModelKind,
    pub result: std::result::Result<Vec<FoldMetrics>, String>,
}

impl ModelOutcome {
    pub fn report(&self) -> Option<MetricsReport> {
        self.result.as_ref().ok().and_then(|f| MetricsReport::aggregate(f).ok())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemResult {
    pub problem: Problem,
    pub outcomes: Vec<ModelOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub n_individuals: usize,
    pub features: Vec<String>,
    pub selected_k: Option<usize>,
    pub bic: Vec<BicRow>,
    pub problems: Vec<ProblemResult>,
    /// F1 rank test over the problems where every model succeeded.
    pub rank_test: std::result::Result<RankTestResult, String>,
}

impl BenchmarkReport {
    /// Mean and standard deviation over problems of the per-problem fold
    /// averages, in the order of the metric names, for each model.
    pub fn summary(&self) -> Vec<(ModelKind, [Summary; 4])> {
        self.config
            .models
            .iter()
            .map(|&model| {
                let per_problem: Vec<[f64; 4]> = self
                    .problems
                    .iter()
                    .filter_map(|p| p.outcomes.iter().find(|o| o.model == model)?.report())
                    .map(|r| r.metrics().map(|s| s.mean))
                    .collect();
                let summaries =
                    std::array::from_fn(|j| Summary::of(&per_problem.iter().map(|m| m[j]).collect::<Vec<_>>()));
                (model, summaries)
            })
            .collect()
    }
}

fn fit_constant_mbnb(train: &Dataset, alpha: f64) -> Result<(MbnbParams, Vec<f64>)> {
    let labeled: Vec<usize> = (0..train.n_rows()).filter(|&t| train.label(t).is_known()).collect();
    let mut ds = train.select_rows(&labeled);
    ds.set_prior_strategy(PriorStrategy::ObservedFrequency)?;
    let x = crate::dataset::impute_constant(&ds);
    let m = mbnb::fit_soft(&x, ds.labels().expect("labeled"), alpha, ds.feature_names())?;
    let priors = ds.features().iter().map(|f| f.prior).collect();
    Ok((m, priors))
}

enum Fitted {
    Marginal(MbnbParams),
    Constant(MbnbParams, Vec<f64>),
    Hbm(HbmModel),
}

impl Fitted {
    fn posterior(&self, x: &[Ternary]) -> Result<f64> {
        match self {
            Fitted::Marginal(m) => mbnb::posterior(m, x),
            Fitted::Constant(m, priors) => {
                let soft: Vec<f64> = x.iter().zip(priors).map(|(v, &p)| v.as_f64().unwrap_or(p)).collect();
                mbnb::posterior_soft(m, &soft)
            }
            Fitted::Hbm(h) => hbm_posterior(h, x),
        }
    }
}

fn fit_model(model: ModelKind, train: &Dataset, cfg: &BenchmarkConfig, k: usize) -> Result<Fitted> {
    Ok(match model {
        ModelKind::Mbnb => match cfg.mbnb_imputation {
            MbnbImputation::Marginalize => Fitted::Marginal(mbnb::fit_mle(train, cfg.alpha)?),
            MbnbImputation::Constant => {
                let (m, priors) = fit_constant_mbnb(train, cfg.alpha)?;
                Fitted::Constant(m, priors)
            }
        },
        ModelKind::MbnbEm => Fitted::Marginal(fit_mbnb_em(train, cfg.alpha, &cfg.em)?.params),
        ModelKind::Hbm => Fitted::Hbm(fit_hbm(train, k, cfg.restarts, cfg.alpha, &cfg.em, cfg.hbm_variant)?),
    })
}

/// Cross-validates one model on one labeled dataset. Unlabeled training
/// rows are kept for the models that use them; only rows with a definite
/// label are scored.
pub fn cross_validate(ds: &Dataset, model: ModelKind, cfg: &BenchmarkConfig, k: usize, seed: u64) -> Result<Vec<FoldMetrics>> {
    let labels = ds.labels().ok_or_else(|| Error::Fit("dataset has no label column".into()))?;
    let split = stratified_kfold(labels, cfg.folds, seed)?;
    let mut out = Vec::with_capacity(cfg.folds);
    for fold in 0..cfg.folds {
        let train = ds.select_rows(&split.train_indices(fold));
        let fitted = fit_model(model, &train, cfg, k)?;
        let (mut y_true, mut y_pred) = (vec![], vec![]);
        for t in split.test_indices(fold) {
            let Some(y) = labels[t].as_bool() else { continue };
            y_true.push(y);
            y_pred.push(fitted.posterior(ds.row(t))? > 0.5);
        }
        out.push(compute_metrics(&y_true, &y_pred)?);
    }
    Ok(out)
}

/// Encodes the knowledge base, drops low-variance features, generates the
/// problems and cross-validates every configured model on each of them.
pub fn run_benchmark(kb: &KnowledgeBase, cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    if cfg.models.is_empty() {
        return Err(invalid("models", "at least one model is required"));
    }
    cfg.em.validate()?;
    let encoded = encode_individuals(kb, &generate_features(kb))?;
    let ds = variance_select(&encoded, cfg.variance_cutoff)?;
    if ds.n_features() == 0 {
        return Err(invalid("variance_cutoff", "no feature survives the variance filter"));
    }
    let constraints = ProblemConstraints {
        min_pos: cfg.min_pos.max(cfg.folds),
        min_neg: cfg.min_neg.max(cfg.folds),
        min_unknown_if_any: cfg.folds,
    };
    let problems = generate_problems_for(&ds, cfg.problems, &constraints, cfg.seed)?;
    let (selected_k, bic) = if cfg.models.contains(&ModelKind::Hbm) {
        let (k, table) = select_k(&ds, &cfg.k_grid, cfg.restarts, &cfg.em)?;
        (Some(k), table)
    } else {
        (None, vec![])
    };

    let mut results = Vec::with_capacity(problems.len());
    for (i, problem) in problems.into_iter().enumerate() {
        let labeled = ds.clone().with_labels(problem.labels.clone())?;
        let outcomes = cfg
            .models
            .iter()
            .map(|&model| ModelOutcome {
                model,
                result: cross_validate(&labeled, model, cfg, selected_k.unwrap_or(1), cfg.seed.wrapping_add(i as u64))
                    .map_err(|e| e.to_string()),
            })
            .collect();
        results.push(ProblemResult { problem, outcomes });
    }

    let scores: Vec<Vec<f64>> = results
        .iter()
        .filter_map(|p| {
            p.outcomes
                .iter()
                .map(|o| o.report().map(|r| r.f1.mean))
                .collect::<Option<Vec<f64>>>()
        })
        .collect();
    let rank_test = friedman_nemenyi(&scores, cfg.rank_alpha).map_err(|e| e.to_string());

    Ok(BenchmarkReport {
        config: cfg.clone(),
        n_individuals: ds.n_rows(),
        features: ds.feature_names(),
        selected_k,
        bic,
        problems: results,
        rank_test,
    })
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(vec![]);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// `summary.csv`: model, metric, mean, std over problems.
pub fn summary_csv(report: &BenchmarkReport) -> Result<String> {
    let mut rows = vec![];
    for (model, metrics) in report.summary() {
        for (name, s) in METRIC_NAMES.iter().zip(metrics) {
            rows.push(vec![model.as_str().to_string(), name.to_string(), num(s.mean), num(s.std)]);
        }
    }
    csv_text(&["model", "metric", "mean", "std"], &rows)
}

/// `problems.csv`: one line per problem with its definition and label counts.
pub fn problems_csv(report: &BenchmarkReport) -> Result<String> {
    let rows: Vec<Vec<String>> = report
        .problems
        .iter()
        .map(|p| {
            let (pos, neg, unk) = p.problem.counts();
            let failures: Vec<String> = p
                .outcomes
                .iter()
                .filter_map(|o| o.result.as_ref().err().map(|e| format!("{}: {e}", o.model.as_str())))
                .collect();
            vec![
                p.problem.name.clone(),
                p.problem.definition.to_string(),
                pos.to_string(),
                neg.to_string(),
                unk.to_string(),
                if failures.is_empty() { "ok".into() } else { failures.join("; ") },
            ]
        })
        .collect();
    csv_text(&["problem", "definition", "positives", "negatives", "unknown", "status"], &rows)
}

/// Per-fold metrics of every model on one problem.
pub fn problem_detail_csv(p: &ProblemResult) -> Result<String> {
    let mut rows = vec![];
    for o in &p.outcomes {
        let Ok(folds) = &o.result else { continue };
        for (f, m) in folds.iter().enumerate() {
            rows.push(vec![
                o.model.as_str().to_string(),
                f.to_string(),
                num(m.precision),
                num(m.recall),
                num(m.f1),
                num(m.gmean),
                m.support_pos.to_string(),
                m.support_neg.to_string(),
                m.undefined.join(" "),
            ]);
        }
    }
    csv_text(
        &["model", "fold", "precision", "recall", "f1", "gmean", "support_pos", "support_neg", "undefined"],
        &rows,
    )
}

/// Human-readable rank test and run settings. The first line carries the
/// generation time and is the only line that differs between runs.
pub fn rank_test_text(report: &BenchmarkReport) -> String {
    let cfg = &report.config;
    let mut out = format!(
        "# generated: {}\n",
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    );
    let models: Vec<&str> = cfg.models.iter().map(|m| m.as_str()).collect();
    let _ = writeln!(out, "individuals: {}", report.n_individuals);
    let _ = writeln!(out, "features: {}", report.features.len());
    let _ = writeln!(out, "folds: {}  problems: {}  seed: {}", cfg.folds, cfg.problems, cfg.seed);
    let _ = writeln!(out, "gmean: computed per fold, then averaged over folds and problems");
    if let Some(k) = report.selected_k {
        let _ = writeln!(out, "hbm: variant {}, K = {k} (BIC)", cfg.hbm_variant.as_str());
        for row in &report.bic {
            let _ = writeln!(out, "  K={} loglik={} bic={}", row.k, num(row.loglik), num(row.bic));
        }
    }
    let _ = writeln!(out, "models: {}", models.join(" "));
    match &report.rank_test {
        Ok(r) => {
            let _ = writeln!(out, "friedman statistic (f1): {}", num(r.friedman_statistic));
            let _ = writeln!(out, "p-value: {}", num(r.p_value));
            let _ = writeln!(out, "critical difference (alpha={}): {}", cfg.rank_alpha.value(), num(r.critical_difference));
            for (m, rank) in models.iter().zip(&r.mean_ranks) {
                let _ = writeln!(out, "mean rank {m}: {}", num(*rank));
            }
            if r.significant_pairs.is_empty() {
                let _ = writeln!(out, "significant pairs: none");
            }
            for &(a, b) in &r.significant_pairs {
                let _ = writeln!(out, "significant pair: {} vs {}", models[a], models[b]);
            }
        }
        Err(e) => {
            let _ = writeln!(out, "rank test not run: {e}");
        }
    }
    out
}

/// Writes `summary.csv`, `problems.csv`, `problems/<name>.csv` and
/// `rank_test.txt` under `dir`.
pub fn write_report(report: &BenchmarkReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("problems"))?;
    fs::write(dir.join("summary.csv"), summary_csv(report)?)?;
    fs::write(dir.join("problems.csv"), problems_csv(report)?)?;
    for p in &report.problems {
        fs::write(dir.join("problems").join(format!("{}.csv", p.problem.name)), problem_detail_csv(p)?)?;
    }
    fs::write(dir.join("rank_test.txt"), rank_test_text(report))?;
    Ok(())
}

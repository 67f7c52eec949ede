//! Benchmark harness: problem generation, cross-validation, metrics and
//! rank statistics.

mod benchmark;
mod folds;
mod metrics;
mod problems;
mod rank_test;

pub use benchmark::{
    cross_validate, problem_detail_csv, problems_csv, rank_test_text, run_benchmark, summary_csv, write_report,
    BenchmarkConfig, BenchmarkReport, MbnbImputation, ModelKind, ModelOutcome, ProblemResult,
};
pub use folds::{stratified_kfold, FoldSplit};
pub use metrics::{compute_metrics, FoldMetrics, MetricsReport, Summary, METRIC_NAMES};
pub use problems::{
    generate_problems, generate_problems_for, Definition, FeatureLiteral, Problem, ProblemConstraints, MAX_REJECTIONS,
};
pub use rank_test::{friedman_nemenyi, rank_row, NemenyiAlpha, RankTestResult};

//! Cross-validated comparison of the three classifiers on problems drawn
//! from a knowledge base, with a Friedman/Nemenyi rank test.
//!
//! cargo run --release --example benchmark -- examples/synthetic200.kb

use kgbayes::eval::{run_benchmark, BenchmarkConfig, METRIC_NAMES};
use kgbayes::kg_encoder::parse_kb;

fn main() -> kgbayes::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "examples/synthetic200.kb".into());
    let kb = parse_kb(&std::fs::read_to_string(&path)?)?;
    let cfg = BenchmarkConfig {
        folds: 5,
        problems: 6,
        restarts: 3,
        k_grid: (2..=5).collect(),
        ..BenchmarkConfig::default()
    };
    let report = run_benchmark(&kb, &cfg)?;
    println!("{} individuals, {} features, K = {:?}", report.n_individuals, report.features.len(), report.selected_k);
    for p in &report.problems {
        println!("{}: {}", p.problem.name, p.problem.definition);
    }
    println!();
    for (model, metrics) in report.summary() {
        let cells: Vec<String> =
            METRIC_NAMES.iter().zip(metrics).map(|(n, s)| format!("{n} {:.3}±{:.3}", s.mean, s.std)).collect();
        println!("{:<8} {}", model.as_str(), cells.join("  "));
    }
    match &report.rank_test {
        Ok(r) => println!(
            "\nFriedman chi2 {:.3}, p = {:.4}; mean ranks {:?}; CD {:.3}",
            r.friedman_statistic, r.p_value, r.mean_ranks, r.critical_difference
        ),
        Err(e) => println!("\nrank test skipped: {e}"),
    }
    Ok(())
}

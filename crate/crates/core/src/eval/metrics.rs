//! Support-weighted binary classification metrics.

use crate::error::{check_dim, invalid, Result};

/// Metrics of one test fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gmean: f64,
    pub support_pos: usize,
    pub support_neg: usize,
    /// Quantities whose denominator was zero and were set to 0.
    pub undefined: Vec<&'static str>,
}

fn ratio(num: usize, den: usize, name: &'static str, undefined: &mut Vec<&'static str>) -> f64 {
    if den == 0 {
        undefined.push(name);
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f_score(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Per-class precision, recall and F1 averaged with class supports as
/// weights; the G-mean is `sqrt(recall_pos · recall_neg)`.
pub fn compute_metrics(y_true: &[bool], y_pred: &[bool]) -> Result<FoldMetrics> {
    check_dim(y_true.len(), y_pred.len())?;
    if y_true.is_empty() {
        return Err(invalid("y_true", "no test examples"));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let mut undefined = Vec::new();
    let prec_pos = ratio(tp, tp + fp, "precision_pos", &mut undefined);
    let rec_pos = ratio(tp, tp + fn_, "recall_pos", &mut undefined);
    let prec_neg = ratio(tn, tn + fn_, "precision_neg", &mut undefined);
    let rec_neg = ratio(tn, tn + fp, "recall_neg", &mut undefined);
    let n = y_true.len() as f64;
    let (w_pos, w_neg) = ((tp + fn_) as f64 / n, (tn + fp) as f64 / n);
    Ok(FoldMetrics {
        precision: w_pos * prec_pos + w_neg * prec_neg,
        recall: w_pos * rec_pos + w_neg * rec_neg,
        f1: w_pos * f_score(prec_pos, rec_pos) + w_neg * f_score(prec_neg, rec_neg),
        gmean: (rec_pos * rec_neg).sqrt(),
        support_pos: tp + fn_,
        support_neg: tn + fp,
        undefined,
    })
}

/// Mean and standard deviation (n − 1 denominator, 0 for a single value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        use statrs::statistics::Statistics;
        if values.is_empty() {
            return Summary { mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.mean();
        let std = if values.len() < 2 { 0.0 } else { values.std_dev() };
        Summary { mean, std }
    }
}

/// Metrics aggregated over folds (or over problems).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub precision: Summary,
    pub recall: Summary,
    pub f1: Summary,
    pub gmean: Summary,
    pub support_pos: usize,
    pub support_neg: usize,
    /// Number of folds with at least one undefined quantity.
    pub flagged_folds: usize,
}

pub const METRIC_NAMES: [&str; 4] = ["precision", "recall", "f1", "gmean"];

impl MetricsReport {
    pub fn aggregate(folds: &[FoldMetrics]) -> Result<MetricsReport> {
        if folds.is_empty() {
            return Err(invalid("folds", "nothing to aggregate"));
        }
        let col = |f: fn(&FoldMetrics) -> f64| Summary::of(&folds.iter().map(f).collect::<Vec<_>>());
        Ok(MetricsReport {
            precision: col(|m| m.precision),
            recall: col(|m| m.recall),
            f1: col(|m| m.f1),
            gmean: col(|m| m.gmean),
            support_pos: folds.iter().map(|m| m.support_pos).sum(),
            support_neg: folds.iter().map(|m| m.support_neg).sum(),
            flagged_folds: folds.iter().filter(|m| !m.undefined.is_empty()).count(),
        })
    }

    /// Summaries in [`METRIC_NAMES`] order.
    pub fn metrics(&self) -> [Summary; 4] {
        [self.precision, self.recall, self.f1, self.gmean]
    }
}

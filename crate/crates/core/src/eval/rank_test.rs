//! Friedman test with the Nemenyi post-hoc comparison.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};

/// Significance levels with tabulated Nemenyi constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NemenyiAlpha {
    #[default]
    P05,
    P10,
}

impl NemenyiAlpha {
    pub fn value(self) -> f64 {
        match self {
            NemenyiAlpha::P05 => 0.05,
            NemenyiAlpha::P10 => 0.10,
        }
    }

    /// Studentized range statistic divided by √2, for k = 2..=10 models.
    pub fn q(self, k: usize) -> Option<f64> {
        const Q05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
        const Q10: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];
        let table = match self {
            NemenyiAlpha::P05 => &Q05,
            NemenyiAlpha::P10 => &Q10,
        };
        k.checked_sub(2).and_then(|i| table.get(i)).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTestResult {
    pub friedman_statistic: f64,
    pub p_value: f64,
    /// Average rank per model, 1 = best.
    pub mean_ranks: Vec<f64>,
    pub critical_difference: f64,
    /// Model index pairs whose mean ranks differ by more than the critical
    /// difference.
    pub significant_pairs: Vec<(usize, usize)>,
}

/// Ranks one row of scores, higher is better, ties sharing the average rank.
pub fn rank_row(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &m in &order[i..=j] {
            ranks[m] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// `scores[problem][model]`, higher is better.
pub fn friedman_nemenyi(scores: &[Vec<f64>], alpha: NemenyiAlpha) -> Result<RankTestResult> {
    let n = scores.len();
    if n < 2 {
        return Err(invalid("scores", format!("{n} problems; at least 2 are needed")));
    }
    let k = scores[0].len();
    if k < 2 {
        return Err(invalid("scores", format!("{k} models; at least 2 are needed")));
    }
    if scores.iter().any(|row| row.len() != k) {
        return Err(invalid("scores", "rows have different numbers of models"));
    }
    if scores.iter().flatten().any(|s| s.is_nan()) {
        return Err(invalid("scores", "NaN score"));
    }
    let q = alpha
        .q(k)
        .ok_or_else(|| invalid("scores", format!("critical values are tabulated for at most 10 models, got {k}")))?;
    let mut mean_ranks = vec![0.0; k];
    for row in scores {
        for (acc, r) in mean_ranks.iter_mut().zip(rank_row(row)) {
            *acc += r;
        }
    }
    for r in &mut mean_ranks {
        *r /= n as f64;
    }
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let statistic = (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let chi = ChiSquared::new(kf - 1.0).expect("k >= 2 gives positive degrees of freedom");
    let p_value = chi.sf(statistic).clamp(0.0, 1.0);
    let critical_difference = q * (kf * (kf + 1.0) / (6.0 * nf)).sqrt();
    let mut significant_pairs = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if (mean_ranks[a] - mean_ranks[b]).abs() > critical_difference {
                significant_pairs.push((a, b));
            }
        }
    }
    Ok(RankTestResult {
        friedman_statistic: statistic,
        p_value,
        mean_ranks,
        critical_difference,
        significant_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_ordering() {
        let scores = vec![vec![0.9, 0.5, 0.1]; 10];
        let r = friedman_nemenyi(&scores, NemenyiAlpha::P05).unwrap();
        assert_eq!(r.mean_ranks, vec![1.0, 2.0, 3.0]);
        assert_eq!(r.friedman_statistic, 20.0);
        // two degrees of freedom: the survival function is exp(-x/2)
        assert!((r.p_value - (-10.0f64).exp()).abs() < 1e-15);
        assert!((r.critical_difference - 2.343 * (12.0f64 / 60.0).sqrt()).abs() < 1e-12);
        assert_eq!(r.significant_pairs, vec![(0, 2)]);
    }

    #[test]
    fn identical_scores() {
        let r = friedman_nemenyi(&vec![vec![0.5; 4]; 6], NemenyiAlpha::P10).unwrap();
        assert_eq!(r.friedman_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(r.significant_pairs.is_empty());
        assert_eq!(r.mean_ranks, vec![2.5; 4]);
    }

    #[test]
    fn tied_ranks_average() {
        assert_eq!(rank_row(&[0.3, 0.7, 0.3, 0.1]), vec![2.5, 1.0, 2.5, 4.0]);
    }

    #[test]
    fn argument_checks() {
        assert!(friedman_nemenyi(&[vec![1.0, 2.0]], NemenyiAlpha::P05).is_err());
        assert!(friedman_nemenyi(&[vec![1.0], vec![2.0]], NemenyiAlpha::P05).is_err());
        assert!(friedman_nemenyi(&vec![vec![0.0; 11]; 3], NemenyiAlpha::P05).is_err());
        assert_eq!(NemenyiAlpha::P10.q(2), Some(1.645));
    }
}

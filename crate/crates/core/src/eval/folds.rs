//! Stratified k-fold splits over ternary labels.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Ternary;
use crate::error::{invalid, Result};

/// Fold index of every row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    k: usize,
    assignment: Vec<usize>,
}

impl FoldSplit {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&t| self.assignment[t] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&t| self.assignment[t] != fold).collect()
    }
}

/// Shuffles the positive, negative and unknown strata independently and
/// deals them round-robin. Dealing continues across strata, so fold sizes
/// also differ by at most one.
pub fn stratified_kfold(labels: &[Ternary], k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 {
        return Err(invalid("k", format!("{k} folds; at least 2 are needed")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for (stratum, name) in [(Ternary::True, "positive"), (Ternary::False, "negative"), (Ternary::Unknown, "unknown")] {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&t| labels[t] == stratum).collect();
        if rows.is_empty() {
            continue;
        }
        if rows.len() < k {
            return Err(invalid(
                "k",
                format!("{k} folds but the {name} stratum has only {} rows", rows.len()),
            ));
        }
        rows.shuffle(&mut rng);
        for t in rows {
            assignment[t] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldSplit { k, assignment })
}

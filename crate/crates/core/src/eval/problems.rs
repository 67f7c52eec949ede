//! Random disjunctive target classes over an encoded knowledge base.

use std::collections::HashSet;
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, Ternary};
use crate::error::{invalid, Error, Result};
use crate::kg_encoder::{encode_individuals, Feature, KnowledgeBase};

/// Candidates rejected before generation gives up.
pub const MAX_REJECTIONS: usize = 10_000;

/// A feature or its negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureLiteral {
    /// Column of the feature in the encoded dataset.
    pub index: usize,
    pub name: String,
    pub positive: bool,
}

/// Disjunction of conjunctions of feature literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Definition {
    pub disjuncts: Vec<Vec<FeatureLiteral>>,
}

impl Definition {
    /// Open-world truth value of the definition for one encoded row.
    pub fn evaluate(&self, row: &[Ternary]) -> Ternary {
        let mut all_false = true;
        for conj in &self.disjuncts {
            let mut all_true = true;
            let mut any_false = false;
            for lit in conj {
                let v = if lit.positive { row[lit.index] } else { row[lit.index].negate() };
                all_true &= v == Ternary::True;
                any_false |= v == Ternary::False;
            }
            if all_true {
                return Ternary::True;
            }
            all_false &= any_false;
        }
        if all_false {
            Ternary::False
        } else {
            Ternary::Unknown
        }
    }

    /// No conjunction repeats another (literal order ignored).
    pub fn has_distinct_disjuncts(&self) -> bool {
        let mut seen = HashSet::new();
        self.disjuncts.iter().all(|conj| {
            let mut key: Vec<(usize, bool)> = conj.iter().map(|l| (l.index, l.positive)).collect();
            key.sort_unstable();
            seen.insert(key)
        })
    }

    pub fn label(&self, ds: &Dataset) -> Vec<Ternary> {
        ds.rows().map(|row| self.evaluate(row)).collect()
    }
}

impl fmt::Display for Definition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .disjuncts
            .iter()
            .map(|conj| {
                let lits: Vec<String> = conj
                    .iter()
                    .map(|l| if l.positive { l.name.clone() } else { format!("not {}", l.name) })
                    .collect();
                format!("({})", lits.join(" and "))
            })
            .collect();
        f.write_str(&parts.join(" or "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub name: String,
    pub definition: Definition,
    pub labels: Vec<Ternary>,
}

impl Problem {
    /// Positive, negative and unknown label counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        let c = |v| self.labels.iter().filter(|&&y| y == v).count();
        (c(Ternary::True), c(Ternary::False), c(Ternary::Unknown))
    }
}

/// Acceptance rule for sampled problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemConstraints {
    pub min_pos: usize,
    pub min_neg: usize,
    /// An unknown stratum, if present, needs at least this many members
    /// (so it can be spread over the cross-validation folds).
    pub min_unknown_if_any: usize,
}

/// Samples `n` problems whose definitions use the encoding of `features`.
pub fn generate_problems(
    kb: &KnowledgeBase,
    features: &[Feature],
    n: usize,
    min_pos: usize,
    min_neg: usize,
    seed: u64,
) -> Result<Vec<Problem>> {
    let ds = encode_individuals(kb, features)?;
    let constraints = ProblemConstraints {
        min_pos,
        min_neg,
        min_unknown_if_any: 0,
    };
    generate_problems_for(&ds, n, &constraints, seed)
}

/// Samples `n` distinct problems over the columns of an encoded dataset:
/// 2–3 disjuncts of 1–2 literals each.
pub fn generate_problems_for(ds: &Dataset, n: usize, c: &ProblemConstraints, seed: u64) -> Result<Vec<Problem>> {
    if n == 0 {
        return Err(invalid("n", "at least one problem must be requested"));
    }
    let d = ds.n_features();
    if d == 0 {
        return Err(invalid("features", "no features to build definitions from"));
    }
    let names = ds.feature_names();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut problems = Vec::with_capacity(n);
    // failures per constraint: positives, negatives, unknowns, duplicates
    let mut failures = [0usize; 4];
    let mut rejected = 0;
    while problems.len() < n {
        let definition = Definition {
            disjuncts: (0..rng.gen_range(2..=3))
                .map(|_| {
                    let len = rng.gen_range(1..=2).min(d);
                    sample(&mut rng, d, len)
                        .into_iter()
                        .map(|index| FeatureLiteral {
                            index,
                            name: names[index].clone(),
                            positive: rng.gen_bool(0.5),
                        })
                        .collect()
                })
                .collect(),
        };
        let labels = definition.label(ds);
        let count = |v| labels.iter().filter(|&&y| y == v).count();
        let (pos, neg, unk) = (count(Ternary::True), count(Ternary::False), count(Ternary::Unknown));
        let checks = [
            pos >= c.min_pos,
            neg >= c.min_neg,
            unk == 0 || unk >= c.min_unknown_if_any,
            !seen.contains(&labels) && definition.has_distinct_disjuncts(),
        ];
        if checks.iter().all(|&ok| ok) {
            seen.insert(labels.clone());
            problems.push(Problem {
                name: format!("P{}", problems.len() + 1),
                definition,
                labels,
            });
            continue;
        }
        for (f, ok) in failures.iter_mut().zip(checks) {
            *f += usize::from(!ok);
        }
        rejected += 1;
        if rejected >= MAX_REJECTIONS {
            let descriptions = [
                format!("at least {} positive individuals", c.min_pos),
                format!("at least {} negative individuals", c.min_neg),
                format!("no unknown individuals or at least {}", c.min_unknown_if_any),
                "distinct disjuncts and a labeling distinct from the problems already accepted".to_string(),
            ];
            let tightest = (0..4).max_by_key(|&i| (failures[i], std::cmp::Reverse(i))).unwrap_or(0);
            return Err(Error::Exhausted {
                attempts: rejected,
                constraint: format!(
                    "{} (failed by {} of the candidates; {} of {n} problems accepted)",
                    descriptions[tightest],
                    failures[tightest],
                    problems.len()
                ),
            });
        }
    }
    Ok(problems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Ternary::{False as F, True as T, Unknown as U};

    fn lit(index: usize, positive: bool) -> FeatureLiteral {
        FeatureLiteral {
            index,
            name: format!("f{}", index + 1),
            positive,
        }
    }

    #[test]
    fn open_world_labeling() {
        let def = Definition {
            disjuncts: vec![vec![lit(0, true), lit(1, false)], vec![lit(2, true)]],
        };
        assert_eq!(def.evaluate(&[T, F, U]), T);
        assert_eq!(def.evaluate(&[U, U, T]), T);
        assert_eq!(def.evaluate(&[F, U, F]), F);
        assert_eq!(def.evaluate(&[T, U, F]), U);
        assert_eq!(def.to_string(), "(f1 and not f2) or (f3)");
        assert!(def.has_distinct_disjuncts());
        let twice = Definition {
            disjuncts: vec![vec![lit(0, true), lit(1, false)], vec![lit(1, false), lit(0, true)]],
        };
        assert!(!twice.has_distinct_disjuncts());
    }

    #[test]
    fn single_feature_disjunct_labels_directly() {
        let rows: Vec<Vec<Ternary>> = (0..100)
            .map(|t| vec![if t < 30 { T } else if t < 80 { F } else { U }])
            .collect();
        let ds = Dataset::new(vec!["a".into()], rows, None, None).unwrap();
        let def = Definition {
            disjuncts: vec![vec![lit(0, true)], vec![lit(0, true)]],
        };
        let p = Problem {
            name: "P1".into(),
            labels: def.label(&ds),
            definition: def,
        };
        assert_eq!(p.counts(), (30, 50, 20));
    }

    fn small_dataset() -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<Ternary>> = (0..60)
            .map(|_| (0..6).map(|_| [T, T, F, F, U][rng.gen_range(0..5)]).collect())
            .collect();
        Dataset::new((1..=6).map(|i| format!("f{i}")).collect(), rows, None, None).unwrap()
    }

    #[test]
    fn seeded_and_constrained() {
        let ds = small_dataset();
        let c = ProblemConstraints {
            min_pos: 5,
            min_neg: 5,
            min_unknown_if_any: 3,
        };
        let a = generate_problems_for(&ds, 4, &c, 7).unwrap();
        assert_eq!(a, generate_problems_for(&ds, 4, &c, 7).unwrap());
        for p in &a {
            let (pos, neg, unk) = p.counts();
            assert!(pos >= 5 && neg >= 5 && (unk == 0 || unk >= 3));
        }
    }

    #[test]
    fn impossible_constraints_exhaust() {
        let ds = small_dataset();
        let c = ProblemConstraints {
            min_pos: 61,
            min_neg: 0,
            min_unknown_if_any: 0,
        };
        match generate_problems_for(&ds, 1, &c, 0) {
            Err(Error::Exhausted { attempts, constraint }) => {
                assert_eq!(attempts, MAX_REJECTIONS);
                assert!(constraint.contains("61 positive"), "{constraint}");
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }
}

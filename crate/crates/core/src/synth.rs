//! Synthetic data with known generating parameters.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::{Dataset, Ternary};
use crate::error::{invalid, Result};
use crate::mbnb::MbnbParams;
use crate::mixture_hbm::MixtureParams;

fn names(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("f{i}")).collect()
}

fn bernoulli_row(p: &[f64], rng: &mut impl Rng) -> Vec<Ternary> {
    p.iter().map(|&p| Ternary::from_bool(rng.gen_bool(p))).collect()
}

/// `n` labeled rows drawn from a naive Bayes model.
pub fn sample_mbnb(m: &MbnbParams, n: usize, rng: &mut impl Rng) -> Dataset {
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let y = rng.gen_bool(m.pi());
        rows.push(bernoulli_row(m.p(y), rng));
        labels.push(Ternary::from_bool(y));
    }
    Dataset::new(m.feature_names().to_vec(), rows, Some(labels), None).expect("consistent shapes")
}

/// A naive Bayes model with `π ~ U(pi_range)` and every feature
/// probability `~ U(p_range)`.
pub fn random_mbnb(d: usize, pi_range: (f64, f64), p_range: (f64, f64), rng: &mut impl Rng) -> MbnbParams {
    let mut draw = |(lo, hi): (f64, f64)| rng.gen_range(lo..hi);
    let pi = draw(pi_range);
    let p1 = (0..d).map(|_| draw(p_range)).collect();
    let p0 = (0..d).map(|_| draw(p_range)).collect();
    MbnbParams::new(pi, p1, p0, names(d), 0.0).expect("ranges inside (0, 1)")
}

/// `n` unlabeled rows drawn from a Bernoulli mixture, with the component
/// of each row.
pub fn sample_mixture(m: &MixtureParams, n: usize, rng: &mut impl Rng) -> (Dataset, Vec<usize>) {
    let mut rows = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let k = m
            .mu()
            .iter()
            .position(|&w| {
                acc += w;
                u < acc
            })
            .unwrap_or(m.k() - 1);
        rows.push(bernoulli_row(&m.components()[k], rng));
        z.push(k);
    }
    let ds = Dataset::new(m.feature_names().to_vec(), rows, None, None).expect("consistent shapes");
    (ds, z)
}

/// Two equally weighted components: `high` on the first half of the
/// coordinates and `low` on the second, and the mirror image.
pub fn two_halves_mixture(d: usize, high: f64, low: f64) -> MixtureParams {
    let half = d / 2;
    let a = (0..d).map(|i| if i < half { high } else { low }).collect();
    let b = (0..d).map(|i| if i < half { low } else { high }).collect();
    MixtureParams::new(vec![0.5, 0.5], vec![a, b], names(d)).expect("valid generator")
}

/// Replaces each input cell by Unknown with probability `cell_rate` and
/// each label with probability `label_rate`, independently of the values.
pub fn erase_mar(ds: &Dataset, cell_rate: f64, label_rate: f64, rng: &mut impl Rng) -> Result<Dataset> {
    for (name, r) in [("cell_rate", cell_rate), ("label_rate", label_rate)] {
        if !(0.0..=1.0).contains(&r) {
            return Err(invalid(name, format!("{r} is outside [0, 1]")));
        }
    }
    let rows: Vec<Vec<Ternary>> = ds
        .rows()
        .map(|row| {
            row.iter()
                .map(|&v| if rng.gen_bool(cell_rate) { Ternary::Unknown } else { v })
                .collect()
        })
        .collect();
    let labels = ds.labels().map(|y| {
        y.iter()
            .map(|&v| if rng.gen_bool(label_rate) { Ternary::Unknown } else { v })
            .collect()
    });
    Dataset::new(ds.feature_names(), rows, labels, Some(ds.row_ids().to_vec()))
}

/// Two blocks of `block` features each. Every row picks a level (`high`
/// or `low`) per block; the label is 1 when both blocks share the level.
/// Each class is then a two-cluster mixture whose marginals are identical
/// to the other class's, which defeats naive Bayes.
pub fn xor_blocks(n: usize, block: usize, high: f64, low: f64, rng: &mut impl Rng) -> Dataset {
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let a = rng.gen_bool(0.5);
        let b = rng.gen_bool(0.5);
        let mut row = Vec::with_capacity(2 * block);
        for level in [a, b] {
            let p = if level { high } else { low };
            row.extend((0..block).map(|_| Ternary::from_bool(rng.gen_bool(p))));
        }
        rows.push(row);
        labels.push(Ternary::from_bool(a == b));
    }
    Dataset::new(names(2 * block), rows, Some(labels), None).expect("consistent shapes")
}

/// Pure conjunctive concept: the first `defining` features are true with
/// probability `strength` for members and 0.5 otherwise; all other
/// probabilities are 0.5.
pub fn conjunctive_concept(d: usize, defining: usize, strength: f64, pi: f64) -> MbnbParams {
    let p1 = (0..d).map(|i| if i < defining { strength } else { 0.5 }).collect();
    MbnbParams::new(pi, p1, vec![0.5; d], names(d), 0.0).expect("valid generator")
}

/// Text of a knowledge base with `n` individuals over a small agent/place
/// taxonomy. Assertions are sampled so that every leaf class is True for
/// some individuals, False (by disjointness or a negative assertion) for
/// others and Unknown for the rest. `livesIn` is closed, so its absence
/// reads as False; the other roles are never False.
pub fn synthetic_kb(n: usize, rng: &mut impl Rng) -> String {
    const PARENTS: [(&str, &str); 7] = [
        ("Student", "Person"),
        ("Teacher", "Person"),
        ("Researcher", "Person"),
        ("University", "Organization"),
        ("Company", "Organization"),
        ("City", "Place"),
        ("Country", "Place"),
    ];
    let mut out = String::from(
        "# generated synthetic knowledge base\n\
         class Agent\nclass Place\nsubclass Person Agent\nsubclass Organization Agent\n\
         subclass City Place\nsubclass Country Place\n\
         subclass Student Person\nsubclass Teacher Person\nsubclass Researcher Person\n\
         subclass University Organization\nsubclass Company Organization\n\
         class Person\nclass Organization\nclass City\nclass Country\nclass Student\nclass Teacher\n\
         class Researcher\nclass University\nclass Company\n\
         disjoint Agent Place\ndisjoint Person Organization\ndisjoint City Country\n\
         disjoint University Company\ndisjoint Student Teacher\n\
         role worksFor\nrole livesIn\nrole knows\nclosed livesIn\n",
    );
    let kinds: Vec<usize> = (0..n).map(|_| rng.gen_range(0..PARENTS.len())).collect();
    let places: Vec<usize> = (0..n).filter(|&a| kinds[a] >= 5).collect();
    let orgs: Vec<usize> = (0..n).filter(|&a| kinds[a] == 3 || kinds[a] == 4).collect();
    for a in 0..n {
        let _ = writeln!(out, "individual ind{a}");
    }
    for (a, &kind) in kinds.iter().enumerate() {
        let (leaf, parent) = PARENTS[kind];
        let u: f64 = rng.gen();
        if u < 0.55 {
            let _ = writeln!(out, "instance ind{a} {leaf}");
        } else if u < 0.85 {
            let _ = writeln!(out, "instance ind{a} {parent}");
        }
        if rng.gen_bool(0.3) {
            let other = PARENTS[(kind + rng.gen_range(1..PARENTS.len())) % PARENTS.len()].0;
            let _ = writeln!(out, "neg-instance ind{a} {other}");
        }
        if kind < 3 {
            if rng.gen_bool(0.6) {
                if let Some(&o) = orgs.choose(rng) {
                    let _ = writeln!(out, "rel worksFor ind{a} ind{o}");
                }
            }
            if rng.gen_bool(0.5) {
                let _ = writeln!(out, "rel knows ind{a} ind{}", rng.gen_range(0..n));
            }
        }
        if kind < 5 && rng.gen_bool(0.5) {
            if let Some(&p) = places.choose(rng) {
                let _ = writeln!(out, "rel livesIn ind{a} ind{p}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg_encoder::{encode_individuals, generate_features, parse_kb};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn synthetic_kb_is_consistent_and_open() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let kb = parse_kb(&synthetic_kb(200, &mut rng)).unwrap();
        let feats = generate_features(&kb);
        assert_eq!(feats.len(), 10);
        let ds = encode_individuals(&kb, &feats).unwrap();
        for i in 0..ds.n_features() {
            let col: Vec<Ternary> = ds.column(i).collect();
            assert!(col.contains(&Ternary::True));
            if i < 7 || ds.feature_names()[i].contains("livesIn") {
                assert!(col.contains(&Ternary::False), "{} is never false", ds.feature_names()[i]);
            }
        }
        assert!(ds.count_unknown_cells() > 0);
    }

    #[test]
    fn xor_blocks_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ds = xor_blocks(400, 3, 0.9, 0.1, &mut rng);
        assert_eq!(ds.n_features(), 6);
        let pos = ds.labels().unwrap().iter().filter(|&&y| y == Ternary::True).count();
        assert!((150..250).contains(&pos));
    }

    #[test]
    fn erasure_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_mbnb(10, (0.4, 0.6), (0.1, 0.9), &mut rng);
        let ds = sample_mbnb(&m, 1000, &mut rng);
        let erased = erase_mar(&ds, 0.3, 0.3, &mut rng).unwrap();
        let frac = erased.count_unknown_cells() as f64 / 10_000.0;
        assert!((frac - 0.3).abs() < 0.03);
        assert!(erase_mar(&ds, 1.5, 0.0, &mut rng).is_err());
    }
}

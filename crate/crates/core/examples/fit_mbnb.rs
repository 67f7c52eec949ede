//! Fit naive Bayes on synthetic data and classify partially observed rows.
//!
//! cargo run --example fit_mbnb

use kgbayes::dataset::Ternary::{False as F, True as T, Unknown as U};
use kgbayes::mbnb::{self, classify};
use kgbayes::synth;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kgbayes::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let truth = synth::random_mbnb(6, (0.3, 0.7), (0.05, 0.95), &mut rng);
    let ds = synth::sample_mbnb(&truth, 5000, &mut rng);
    let fit = mbnb::fit_mle(&ds, 1.0)?;

    println!("pi    true {:.3}  fitted {:.3}", truth.pi(), fit.pi());
    for i in 0..fit.dim() {
        println!(
            "f{}  p1 {:.3} / {:.3}   p0 {:.3} / {:.3}",
            i + 1,
            truth.p1()[i],
            fit.p1()[i],
            truth.p0()[i],
            fit.p0()[i]
        );
    }

    // the most typical member, then the same row with cells hidden;
    // unknown cells are marginalized, pulling the posterior toward the prior
    let typical: Vec<_> = fit.p1().iter().zip(fit.p0()).map(|(a, b)| if a > b { T } else { F }).collect();
    let mut partial = typical.clone();
    partial[..4].fill(U);
    let mut contrary = typical.clone();
    contrary[0] = contrary[0].negate();
    for x in [typical, partial, contrary, vec![U; 6]] {
        let d = classify(&fit, &x, 0.8)?;
        println!("{x:?}  posterior {:.3}  {:?}", d.posterior, d.verdict);
    }
    Ok(())
}

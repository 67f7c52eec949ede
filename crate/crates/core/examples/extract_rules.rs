//! Turn fitted models into readable axioms and rules.
//!
//! cargo run --example extract_rules -- 0.9

use kgbayes::em::EmConfig;
use kgbayes::mbnb;
use kgbayes::mixture_hbm::{fit_hbm, HbmVariant};
use kgbayes::rules::{
    extract_axiom, extract_complement_rule, extract_disjunctive, extract_rule, render_axiom, render_disjunctive,
    render_rule,
};
use kgbayes::synth;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kgbayes::Result<()> {
    let theta: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.9);
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    // members have f1..f3 set with high probability
    let concept = synth::conjunctive_concept(6, 3, 0.97, 0.4);
    let ds = synth::sample_mbnb(&concept, 4000, &mut rng);
    let m = mbnb::fit_mle(&ds, 1.0)?;
    println!("{}\n", render_axiom(&extract_axiom(&m, "Member", theta)?));
    println!("{}\n", render_rule(&extract_rule(&m, "Member", true)));
    println!("{}\n", render_rule(&extract_complement_rule(&m, "Member", true)));

    // a disjunctive concept needs one rule per mixture component; links are
    // P(component | class), so with two equal clusters each is near 0.5
    let xor = synth::xor_blocks(2000, 3, 0.95, 0.05, &mut rng);
    let h = fit_hbm(&xor, 2, 5, 1.0, &EmConfig::default(), HbmVariant::ClassConditional)?;
    println!("{}", render_disjunctive(&extract_disjunctive(&h, "Same", 0.3, &xor)?));
    Ok(())
}

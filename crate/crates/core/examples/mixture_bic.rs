//! Choose the number of Bernoulli mixture components by BIC.
//!
//! cargo run --example mixture_bic

use kgbayes::em::EmConfig;
use kgbayes::mixture_hbm::{fit_mixture, select_k, MixtureParams};
use kgbayes::synth;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kgbayes::Result<()> {
    let truth = MixtureParams::unnamed(
        vec![0.3, 0.3, 0.4],
        vec![
            vec![0.9, 0.9, 0.9, 0.1, 0.1, 0.1, 0.5, 0.5],
            vec![0.1, 0.1, 0.1, 0.9, 0.9, 0.9, 0.5, 0.5],
            vec![0.5, 0.5, 0.1, 0.1, 0.9, 0.9, 0.9, 0.1],
        ],
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (ds, _) = synth::sample_mixture(&truth, 2000, &mut rng);
    let ds = synth::erase_mar(&ds, 0.1, 0.0, &mut rng)?;

    let cfg = EmConfig::default();
    let (k, table) = select_k(&ds, &[1, 2, 3, 4, 5, 6], 5, &cfg)?;
    println!("K   loglik        params  BIC");
    for row in &table {
        println!("{:<3} {:<13.2} {:<7} {:.2}", row.k, row.loglik, row.free_parameters, row.bic);
    }
    println!("selected K = {k}");
    let (best, _) = fit_mixture(&ds, k, 5, &cfg)?;
    for (w, p) in best.mu().iter().zip(best.components()) {
        let p: Vec<String> = p.iter().map(|v| format!("{v:.2}")).collect();
        println!("  weight {w:.3}  [{}]", p.join(" "));
    }
    Ok(())
}

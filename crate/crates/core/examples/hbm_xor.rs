//! A concept naive Bayes cannot represent: each class is a union of two
//! clusters with the same feature marginals. The class-conditional
//! hierarchical model recovers it.
//!
//! cargo run --example hbm_xor

use kgbayes::dataset::Ternary;
use kgbayes::em::EmConfig;
use kgbayes::mbnb;
use kgbayes::mixture_hbm::{fit_hbm, hbm_posterior, HbmVariant};
use kgbayes::synth;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kgbayes::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let train = synth::xor_blocks(1500, 4, 0.9, 0.1, &mut rng);
    let test = synth::xor_blocks(500, 4, 0.9, 0.1, &mut rng);
    let test = synth::erase_mar(&test, 0.2, 0.0, &mut rng)?;
    let cfg = EmConfig::default();

    let nb = mbnb::fit_mle(&train, 1.0)?;
    let pipeline = fit_hbm(&train, 2, 5, 1.0, &cfg, HbmVariant::Pipeline)?;
    let class_cond = fit_hbm(&train, 2, 5, 1.0, &cfg, HbmVariant::ClassConditional)?;

    let accuracy = |score: &dyn Fn(&[Ternary]) -> kgbayes::Result<f64>| -> kgbayes::Result<f64> {
        let mut hits = 0;
        for t in 0..test.n_rows() {
            let positive = score(test.row(t))? > 0.5;
            hits += usize::from(Ternary::from_bool(positive) == test.label(t));
        }
        Ok(hits as f64 / test.n_rows() as f64)
    };
    println!("naive Bayes              {:.3}", accuracy(&|x| mbnb::posterior(&nb, x))?);
    println!("hbm, pipeline            {:.3}", accuracy(&|x| hbm_posterior(&pipeline, x))?);
    println!("hbm, class-conditional   {:.3}", accuracy(&|x| hbm_posterior(&class_cond, x))?);
    Ok(())
}

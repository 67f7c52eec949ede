//! Two-phase EM on data with missing inputs and labels, compared with
//! constant imputation.
//!
//! cargo run --example em_missing_data -- 0.4

use kgbayes::dataset::{impute_constant, Ternary};
use kgbayes::em::{fit_mbnb_em, EmConfig};
use kgbayes::mbnb::{self, MbnbParams};
use kgbayes::synth;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn max_error(a: &MbnbParams, b: &MbnbParams) -> f64 {
    a.p1().iter().zip(b.p1()).chain(a.p0().iter().zip(b.p0())).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn main() -> kgbayes::Result<()> {
    let rate: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let truth = synth::random_mbnb(8, (0.4, 0.6), (0.1, 0.9), &mut rng);
    let full = synth::sample_mbnb(&truth, 3000, &mut rng);
    let ds = synth::erase_mar(&full, rate, rate / 2.0, &mut rng)?;
    println!("{} of {} cells unknown", ds.count_unknown_cells(), ds.n_rows() * ds.n_features());

    let em = fit_mbnb_em(&ds, 1.0, &EmConfig::default())?;
    println!("phase 1: {} iterations, objective {:.2}", em.phase1.iterations, em.phase1.final_loglik());
    println!("phase 2: {} iterations, objective {:.2}", em.phase2.iterations, em.phase2.final_loglik());

    let labels = ds.labels().unwrap_or_default();
    let constant = mbnb::fit_soft(&impute_constant(&ds), labels, 1.0, ds.feature_names())?;
    println!("max parameter error  em {:.4}  constant {:.4}", max_error(&em.params, &truth), max_error(&constant, &truth));

    let unlabeled = labels.iter().filter(|&&y| y == Ternary::Unknown).count();
    println!("{unlabeled} unlabeled rows received soft labels");
    Ok(())
}

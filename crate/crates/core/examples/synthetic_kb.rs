//! Print a synthetic knowledge base; `examples/synthetic200.kb` is the
//! output for 200 individuals and seed 7.
//!
//! cargo run --example synthetic_kb -- 200 7 > examples/synthetic200.kb

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    print!("{}", kgbayes::synth::synthetic_kb(n, &mut rng));
}

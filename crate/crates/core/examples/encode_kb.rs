//! Encode a knowledge base into ternary feature vectors.
//!
//! cargo run --example encode_kb -- examples/toy.kb

use kgbayes::kg_encoder::{encode_individuals, generate_features, parse_kb, Feature};

fn main() -> kgbayes::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "examples/toy.kb".into());
    let kb = parse_kb(&std::fs::read_to_string(&path)?)?;
    let features = generate_features(&kb);
    let ds = encode_individuals(&kb, &features)?;
    print!("{}", ds.to_csv_string());

    // why is tweety not a Dog?
    let dog = Feature::NamedClass("Dog".into());
    if let Some(chain) = kb.justify("tweety", &dog)? {
        eprintln!("tweety is not a Dog: {}", chain.join(" -> "));
    }
    Ok(())
}

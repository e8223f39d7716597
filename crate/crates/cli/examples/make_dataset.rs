//! Regenerates `data/synthetic.csv`, the bundled benchmark dataset.
//!
//! cargo run -p paxp-cli --example make_dataset

use paxp_core::io::dataset_to_csv;
use paxp_core::synth::{dataset, SynthSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let spec = SynthSpec {
        features: 24,
        min_domain: 2,
        max_domain: 5,
        rows: 2000,
        strength: 1.0,
    };
    let data = dataset(&mut ChaCha8Rng::seed_from_u64(2023), &spec);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic.csv");
    std::fs::write(path, dataset_to_csv(&data, "class")).expect("write dataset");
    println!("wrote {} rows to {path}", data.len());
}

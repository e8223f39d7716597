#![allow(dead_code)]

use paxp_core::count::{FixStatus, Slot};
use paxp_core::nbc::{train, FeatureSpec, Instance, NbcModel};
use paxp_core::synth::{self, SynthSpec};
use paxp_core::xlc::{QuantizedKnapsack, Xlc};
use rand::Rng;

pub fn random_knapsack<R: Rng>(
    rng: &mut R,
    max_m: usize,
    max_d: usize,
    max_w: u64,
) -> QuantizedKnapsack {
    let m = rng.gen_range(1..=max_m);
    let weights: Vec<Vec<u64>> = (0..m)
        .map(|_| {
            let d = rng.gen_range(1..=max_d);
            (0..d).map(|_| rng.gen_range(1..=max_w)).collect()
        })
        .collect();
    let top: u64 = weights.iter().map(|w| *w.iter().max().unwrap()).sum();
    let rhs = rng.gen_range(-1..=top as i64 + 2);
    QuantizedKnapsack::from_weights(&weights, rhs).unwrap()
}

pub fn random_instance<R: Rng>(rng: &mut R, sizes: &[usize]) -> Instance {
    Instance::new(sizes.iter().map(|&d| rng.gen_range(0..d)).collect())
}

pub fn status_from_mask(v: &Instance, mask: u32) -> FixStatus {
    FixStatus::new(
        (0..v.len())
            .map(|i| {
                if mask >> i & 1 == 1 {
                    Slot::Fixed(v.get(i))
                } else {
                    Slot::Free
                }
            })
            .collect(),
    )
}

pub fn random_model<R: Rng>(rng: &mut R, m: usize, max_d: usize) -> NbcModel {
    let spec = SynthSpec {
        features: m,
        min_domain: 2,
        max_domain: max_d,
        rows: 150,
        strength: 1.5,
    };
    let data = synth::dataset(rng, &spec);
    train(&data, 1.0).unwrap()
}

pub fn random_xlc<R: Rng>(rng: &mut R, m: usize, max_d: usize) -> Xlc {
    let weights = (0..m)
        .map(|_| {
            let d = rng.gen_range(1..=max_d);
            (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect()
        })
        .collect();
    Xlc::new(rng.gen_range(-2.0..2.0), weights).unwrap()
}

pub fn sizes(model: &NbcModel) -> Vec<usize> {
    model.features().iter().map(FeatureSpec::size).collect()
}

pub fn all_points(sizes: &[usize]) -> Vec<Instance> {
    let mut out = vec![vec![]];
    for &d in sizes {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..d).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(Instance::new).collect()
}

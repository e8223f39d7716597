//! Seeded synthetic categorical datasets.
//!
//! Labels follow a hidden additive model: each (feature, value) pair carries a
//! random score, and a row is positive with probability `sigmoid(sum)`. That
//! makes naive Bayes a good fit, so trained models are accurate and their
//! explanations are non-trivial.

use rand::Rng;

use crate::nbc::{Class, Dataset, FeatureSpec, Instance};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub features: usize,
    /// Inclusive range of domain sizes.
    pub min_domain: usize,
    pub max_domain: usize,
    pub rows: usize,
    /// Half-width of the per-value score range.
    pub strength: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            features: 6,
            min_domain: 2,
            max_domain: 4,
            rows: 200,
            strength: 1.0,
        }
    }
}

/// Draws a dataset with both classes present.
pub fn dataset<R: Rng>(rng: &mut R, spec: &SynthSpec) -> Dataset {
    assert!(spec.min_domain >= 1 && spec.min_domain <= spec.max_domain);
    assert!(spec.rows >= 2);
    let features: Vec<FeatureSpec> = (0..spec.features)
        .map(|i| {
            let d = rng.gen_range(spec.min_domain..=spec.max_domain);
            FeatureSpec::new(
                format!("f{}", i + 1),
                (0..d).map(|k| format!("v{k}")).collect(),
            )
            .expect("distinct labels")
        })
        .collect();
    let scores: Vec<Vec<f64>> = features
        .iter()
        .map(|f| {
            (0..f.size())
                .map(|_| rng.gen_range(-spec.strength..=spec.strength))
                .collect()
        })
        .collect();
    let centre = -scores
        .iter()
        .map(|s| s.iter().sum::<f64>() / s.len() as f64)
        .sum::<f64>();

    let mut rows = Vec::with_capacity(spec.rows);
    for _ in 0..spec.rows {
        let x: Vec<usize> = features
            .iter()
            .map(|f| rng.gen_range(0..f.size()))
            .collect();
        let s = centre + x.iter().zip(&scores).map(|(&v, s)| s[v]).sum::<f64>();
        let p = 1.0 / (1.0 + (-s).exp());
        let c = if rng.gen::<f64>() < p {
            Class::Positive
        } else {
            Class::Negative
        };
        rows.push((Instance::new(x), c));
    }
    // Both classes must be present for training.
    let n = rows.len();
    if rows.iter().all(|(_, c)| *c == Class::Positive) {
        rows[n - 1].1 = Class::Negative;
    } else if rows.iter().all(|(_, c)| *c == Class::Negative) {
        rows[n - 1].1 = Class::Positive;
    }
    Dataset::new(features, ["no".into(), "yes".into()], rows).expect("rows conform")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_and_well_formed() {
        let spec = SynthSpec::default();
        let a = dataset(&mut ChaCha8Rng::seed_from_u64(7), &spec);
        let b = dataset(&mut ChaCha8Rng::seed_from_u64(7), &spec);
        assert_eq!(a, b);
        assert_eq!(a.features.len(), 6);
        assert_eq!(a.rows.len(), 200);
        assert!(a.rows.iter().any(|(_, c)| *c == Class::Positive));
        assert!(a.rows.iter().any(|(_, c)| *c == Class::Negative));
        assert!(a.features.iter().all(|f| (2..=4).contains(&f.size())));
    }
}

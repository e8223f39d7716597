//! Extended linear classifiers (XLCs) and their integer knapsack form.
//!
//! An XLC scores a point as `nu(x) = w0 + sum_i weight[i][x_i]`. The reduction
//! from a binary naive Bayes model takes `w0` as the log-prior difference and
//! each weight as the log-likelihood difference between the two classes.
//!
//! Every XLC carries the class it *targets*. A freshly reduced XLC targets the
//! positive class and accepts a point iff `nu > 0`. Flipping it toward the
//! negative class negates all weights and accepts iff `nu >= 0`, which keeps
//! ties on the negative side exactly as the classifier resolves them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nbc::{Class, Instance, NbcModel};

/// Maximum number of decimal places accepted by [`quantize`].
pub const MAX_DECIMALS: u32 = 6;

/// Largest magnitude a scaled weight may reach before rounding stops being
/// exact in `f64`.
const MAX_SCALED: f64 = 9.0e15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Xlc {
    w0: f64,
    weights: Vec<Vec<f64>>,
    target: Class,
}

impl Xlc {
    /// An XLC targeting the positive class.
    pub fn new(w0: f64, weights: Vec<Vec<f64>>) -> Result<Self> {
        if !w0.is_finite() || weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::InvalidModel("XLC weights must be finite".into()));
        }
        if weights.iter().any(|w| w.is_empty()) {
            return Err(Error::InvalidModel(
                "every feature needs at least one value".into(),
            ));
        }
        Ok(Xlc {
            w0,
            weights,
            target: Class::Positive,
        })
    }

    /// Reduction of a binary NBC: `w0 = lPr(+) - lPr(-)` and
    /// `v_i^k = lPr(x_i = k | +) - lPr(x_i = k | -)`.
    pub fn reduce(model: &NbcModel) -> Xlc {
        let w0 = model.log_prior(Class::Positive) - model.log_prior(Class::Negative);
        let weights = model
            .features()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                (0..f.size())
                    .map(|k| {
                        model.log_likelihood(i, k, Class::Positive)
                            - model.log_likelihood(i, k, Class::Negative)
                    })
                    .collect()
            })
            .collect();
        Xlc {
            w0,
            weights,
            target: Class::Positive,
        }
    }

    /// The same classifier oriented so that `class` is the accepted side.
    pub fn toward(&self, class: Class) -> Xlc {
        if class == self.target {
            return self.clone();
        }
        Xlc {
            w0: -self.w0,
            weights: self
                .weights
                .iter()
                .map(|w| w.iter().map(|v| -v).collect())
                .collect(),
            target: class,
        }
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn target(&self) -> Class {
        self.target
    }

    pub fn num_features(&self) -> usize {
        self.weights.len()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.weights.iter().map(Vec::len).collect()
    }

    pub fn check(&self, x: &Instance) -> Result<()> {
        if x.len() != self.weights.len() {
            return Err(Error::DomainMismatch(format!(
                "instance has {} values but the classifier has {} features",
                x.len(),
                self.weights.len()
            )));
        }
        for (i, (w, &v)) in self.weights.iter().zip(x.values()).enumerate() {
            if v >= w.len() {
                return Err(Error::DomainMismatch(format!(
                    "value index {v} out of range for feature {} (domain size {})",
                    i + 1,
                    w.len()
                )));
            }
        }
        Ok(())
    }

    /// `w0 + sum_i weight[i][x_i]`.
    pub fn nu(&self, x: &Instance) -> Result<f64> {
        self.check(x)?;
        Ok(self.nu_unchecked(x.values()))
    }

    pub(crate) fn nu_unchecked(&self, x: &[usize]) -> f64 {
        self.w0 + self.weights.iter().zip(x).map(|(w, &v)| w[v]).sum::<f64>()
    }

    /// Whether a score lands on the target side of the decision boundary.
    pub fn accepts_score(&self, nu: f64) -> bool {
        match self.target {
            Class::Positive => nu > 0.0,
            Class::Negative => nu >= 0.0,
        }
    }

    /// Class predicted by the underlying classifier.
    pub fn predict(&self, x: &Instance) -> Result<Class> {
        let nu = self.nu(x)?;
        Ok(if self.accepts_score(nu) {
            self.target
        } else {
            self.target.opposite()
        })
    }

    /// Slack quantities at instance `a`.
    pub fn slack(&self, a: &Instance) -> Result<SlackProfile> {
        self.check(a)?;
        let gamma = self.nu_unchecked(a.values());
        let worst: Vec<f64> = self
            .weights
            .iter()
            .map(|w| w.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let deltas: Vec<f64> = self
            .weights
            .iter()
            .zip(a.values())
            .zip(&worst)
            .map(|((w, &v), &lo)| w[v] - lo)
            .collect();
        let phi = deltas.iter().sum::<f64>() - gamma;
        Ok(SlackProfile {
            gamma,
            deltas,
            phi,
            worst,
            inclusive: self.target == Class::Negative,
        })
    }
}

/// Slack of an instance against an XLC.
///
/// `gamma = nu(a)`, `deltas[i] = v_i^{a_i} - worst[i]`, and
/// `phi = sum(deltas) - gamma`, so the worst-case score over all points is
/// `-phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackProfile {
    pub gamma: f64,
    pub deltas: Vec<f64>,
    pub phi: f64,
    pub worst: Vec<f64>,
    /// `true` when a zero margin still counts as keeping the prediction.
    pub inclusive: bool,
}

impl SlackProfile {
    pub fn num_features(&self) -> usize {
        self.deltas.len()
    }

    pub fn accepts_margin(&self, margin: f64) -> bool {
        if self.inclusive {
            margin >= 0.0
        } else {
            margin > 0.0
        }
    }
}

/// Per-feature weight groups of a quantized knapsack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightGroups {
    /// Distinct weights, strictly increasing, all >= 1.
    pub weights: Vec<u64>,
    /// Number of domain values sharing each weight.
    pub counts: Vec<u64>,
    /// Group index of each original value.
    pub value_to_group: Vec<usize>,
}

impl WeightGroups {
    /// Groups per-value weights into distinct sorted weights with counts.
    pub fn from_values(values: &[u64]) -> Self {
        let mut distinct: Vec<u64> = values.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let counts = distinct
            .iter()
            .map(|w| values.iter().filter(|&&v| v == *w).count() as u64)
            .collect();
        let value_to_group = values
            .iter()
            .map(|v| distinct.binary_search(v).expect("weight present"))
            .collect();
        WeightGroups {
            weights: distinct,
            counts,
            value_to_group,
        }
    }

    pub fn domain_size(&self) -> usize {
        self.value_to_group.len()
    }

    pub fn weight_of(&self, value: usize) -> u64 {
        self.weights[self.value_to_group[value]]
    }

    pub fn min_weight(&self) -> u64 {
        self.weights[0]
    }

    pub fn max_weight(&self) -> u64 {
        *self.weights.last().expect("non-empty domain")
    }
}

/// Integer counting form of an XLC: a point is accepted iff the sum of its
/// per-feature weights is strictly below `rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizedKnapsack {
    pub groups: Vec<WeightGroups>,
    pub rhs: i64,
    pub decimals: u32,
    pub scale: u64,
    pub offset: i64,
    pub target: Class,
}

impl QuantizedKnapsack {
    /// A knapsack given directly by per-value integer weights (all >= 1),
    /// accepting points whose weight sum is below `rhs`.
    pub fn from_weights(weights: &[Vec<u64>], rhs: i64) -> Result<Self> {
        if weights.iter().any(|w| w.is_empty() || w.contains(&0)) {
            return Err(Error::InvalidModel(
                "knapsack weights must be positive with non-empty domains".into(),
            ));
        }
        Ok(QuantizedKnapsack {
            groups: weights
                .iter()
                .map(|w| WeightGroups::from_values(w))
                .collect(),
            rhs,
            decimals: 0,
            scale: 1,
            offset: 0,
            target: Class::Positive,
        })
    }

    pub fn num_features(&self) -> usize {
        self.groups.len()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(WeightGroups::domain_size).collect()
    }

    pub fn check(&self, x: &Instance) -> Result<()> {
        if x.len() != self.groups.len() {
            return Err(Error::DomainMismatch(format!(
                "instance has {} values but the knapsack has {} features",
                x.len(),
                self.groups.len()
            )));
        }
        for (i, (g, &v)) in self.groups.iter().zip(x.values()).enumerate() {
            if v >= g.domain_size() {
                return Err(Error::DomainMismatch(format!(
                    "value index {v} out of range for feature {} (domain size {})",
                    i + 1,
                    g.domain_size()
                )));
            }
        }
        Ok(())
    }

    pub fn weight_sum(&self, x: &[usize]) -> u64 {
        self.groups
            .iter()
            .zip(x)
            .map(|(g, &v)| g.weight_of(v))
            .sum()
    }

    /// Whether the quantized classifier assigns `x` to the target class.
    pub fn accepts(&self, x: &Instance) -> Result<bool> {
        self.check(x)?;
        Ok((self.weight_sum(x.values()) as i128) < self.rhs as i128)
    }

    /// Sum of the largest weight of every feature.
    pub fn max_weight_sum(&self) -> u64 {
        self.groups.iter().map(WeightGroups::max_weight).sum()
    }

    /// Integer slack profile of `a` under the quantized classifier. Weights
    /// are negated back so that larger is better, which makes
    /// [`crate::axp::compute_axp`] applicable with exact arithmetic.
    pub fn slack(&self, a: &Instance) -> Result<SlackProfile> {
        self.check(a)?;
        // Accepted iff rhs - 1 - sum(weights) >= 0.
        let gamma = (self.rhs - 1) as f64 - self.weight_sum(a.values()) as f64;
        let deltas: Vec<f64> = self
            .groups
            .iter()
            .zip(a.values())
            .map(|(g, &v)| (g.max_weight() - g.weight_of(v)) as f64)
            .collect();
        let worst = self
            .groups
            .iter()
            .map(|g| -(g.max_weight() as f64))
            .collect();
        let phi = deltas.iter().sum::<f64>() - gamma;
        Ok(SlackProfile {
            gamma,
            deltas,
            phi,
            worst,
            inclusive: true,
        })
    }
}

/// Rounds to the nearest integer, halves away from zero.
fn round_scaled(v: f64, scale: f64) -> Result<i64> {
    let s = (v * scale).round();
    if !s.is_finite() || s.abs() > MAX_SCALED {
        return Err(Error::ScaleOverflow(format!(
            "weight {v} scaled by {scale} does not fit the table index width"
        )));
    }
    Ok(s as i64)
}

/// Scales an XLC by `10^decimals`, rounds, negates and shifts it into a
/// knapsack with positive integer weights.
///
/// With `u = round(-v * scale)` and `b = round(w0 * scale)`, the offset is
/// `O = 1 - min u` and the right-hand side `W = b + m*O` (plus one when the
/// target is the negative class, so that a zero score is still accepted).
pub fn quantize(xlc: &Xlc, decimals: u32) -> Result<QuantizedKnapsack> {
    if decimals > MAX_DECIMALS {
        return Err(Error::ScaleOverflow(format!(
            "decimals must be at most {MAX_DECIMALS}, got {decimals}"
        )));
    }
    let scale = 10u64.pow(decimals);
    let scale_f = scale as f64;
    let neg: Vec<Vec<i64>> = xlc
        .weights
        .iter()
        .map(|w| w.iter().map(|v| round_scaled(-v, scale_f)).collect())
        .collect::<Result<_>>()?;
    let bias = round_scaled(xlc.w0, scale_f)?;
    let min_u = neg.iter().flatten().copied().min().unwrap_or(0);
    let offset = 1 - min_u;
    let m = xlc.num_features() as i64;

    let overflow = || Error::ScaleOverflow("knapsack right-hand side overflows".into());
    let mut rhs = m
        .checked_mul(offset)
        .and_then(|s| s.checked_add(bias))
        .ok_or_else(overflow)?;
    if xlc.target == Class::Negative {
        rhs = rhs.checked_add(1).ok_or_else(overflow)?;
    }

    let groups = neg
        .iter()
        .map(|u| {
            let shifted: Vec<u64> = u.iter().map(|&x| (x + offset) as u64).collect();
            WeightGroups::from_values(&shifted)
        })
        .collect::<Vec<_>>();
    let total: Option<u64> = groups
        .iter()
        .try_fold(0u64, |acc, g| acc.checked_add(g.max_weight()));
    match total {
        Some(t) if t < i64::MAX as u64 => {}
        _ => return Err(Error::ScaleOverflow("weight sum overflows".into())),
    }

    Ok(QuantizedKnapsack {
        groups,
        rhs,
        decimals,
        scale,
        offset,
        target: xlc.target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example_xlc() -> Xlc {
        Xlc::new(-7.0, vec![vec![1.0, 2.0, 3.0]; 4]).unwrap()
    }

    #[test]
    fn nu_on_sum_example() {
        let x = example_xlc();
        assert_eq!(x.nu(&Instance::new(vec![2; 4])).unwrap(), 5.0);
        assert_eq!(x.nu(&Instance::new(vec![0; 4])).unwrap(), -3.0);
        let zero = Xlc::new(-7.0, vec![vec![0.0; 3]; 4]).unwrap();
        assert_eq!(zero.nu(&Instance::new(vec![1; 4])).unwrap(), -7.0);
        assert!(matches!(
            x.nu(&Instance::new(vec![3, 0, 0, 0])),
            Err(Error::DomainMismatch(_))
        ));
    }

    #[test]
    fn slack_on_sum_example() {
        let s = example_xlc().slack(&Instance::new(vec![2; 4])).unwrap();
        assert_eq!(s.gamma, 5.0);
        assert_eq!(s.deltas, vec![2.0; 4]);
        assert_eq!(s.phi, 3.0);
        assert_eq!(s.worst, vec![1.0; 4]);

        let w = example_xlc().slack(&Instance::new(vec![0; 4])).unwrap();
        assert_eq!(w.deltas, vec![0.0; 4]);
        assert_eq!(w.phi, -w.gamma);
    }

    #[test]
    fn quantize_sum_example() {
        let q = quantize(&example_xlc(), 0).unwrap();
        assert_eq!(q.offset, 4);
        assert_eq!(q.rhs, 9);
        for g in &q.groups {
            assert_eq!(g.weights, vec![1, 2, 3]);
            assert_eq!(g.counts, vec![1, 1, 1]);
            // value 1 picks weight 3, value 3 picks weight 1
            assert_eq!(g.value_to_group, vec![2, 1, 0]);
        }
    }

    #[test]
    fn quantize_constant_classifier() {
        let x = Xlc::new(1.0, vec![vec![0.0; 3], vec![0.0; 2]]).unwrap();
        let q = quantize(&x, 0).unwrap();
        assert_eq!(q.offset, 1);
        assert_eq!(q.rhs, 1 + 2);
        assert_eq!(q.groups[0].weights, vec![1]);
        assert_eq!(q.groups[0].counts, vec![3]);
        assert_eq!(q.groups[1].counts, vec![2]);
    }

    #[test]
    fn quantize_rounds_half_away_from_zero() {
        let x = Xlc::new(0.0, vec![vec![0.5, -0.5, 1.5]]).unwrap();
        let q = quantize(&x, 0).unwrap();
        // u = (-1, 1, -2), O = 3
        assert_eq!(q.offset, 3);
        assert_eq!(q.groups[0].value_to_group.len(), 3);
        assert_eq!(q.groups[0].weight_of(0), 2);
        assert_eq!(q.groups[0].weight_of(1), 4);
        assert_eq!(q.groups[0].weight_of(2), 1);
    }

    #[test]
    fn quantize_rejects_overflow() {
        let x = Xlc::new(0.0, vec![vec![1e12, 0.0]]).unwrap();
        assert!(matches!(quantize(&x, 6), Err(Error::ScaleOverflow(_))));
        assert!(matches!(
            quantize(&example_xlc(), 7),
            Err(Error::ScaleOverflow(_))
        ));
    }

    #[test]
    fn negative_target_keeps_ties() {
        // nu is zero at value 0, so the classifier says negative there
        let x = Xlc::new(0.0, vec![vec![0.0, 1.0]]).unwrap();
        assert_eq!(x.predict(&Instance::new(vec![0])).unwrap(), Class::Negative);
        let n = x.toward(Class::Negative);
        assert_eq!(n.predict(&Instance::new(vec![0])).unwrap(), Class::Negative);
        assert_eq!(n.predict(&Instance::new(vec![1])).unwrap(), Class::Positive);
        let q = quantize(&n, 0).unwrap();
        assert!(q.accepts(&Instance::new(vec![0])).unwrap());
        assert!(!q.accepts(&Instance::new(vec![1])).unwrap());
        let qp = quantize(&x, 0).unwrap();
        assert!(!qp.accepts(&Instance::new(vec![0])).unwrap());
        assert!(qp.accepts(&Instance::new(vec![1])).unwrap());
    }

    #[test]
    fn quantized_slack_is_exact() {
        let q = quantize(&example_xlc(), 0).unwrap();
        let s = q.slack(&Instance::new(vec![2; 4])).unwrap();
        // weight sum 4 < 9, margin 8 - 4 = 4
        assert_eq!(s.gamma, 4.0);
        assert_eq!(s.deltas, vec![2.0; 4]);
        assert_eq!(s.phi, 4.0);
    }
}

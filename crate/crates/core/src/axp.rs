//! Abductive explanations of XLC predictions.
//!
//! Fixing the features in `S` to their values in `a` and letting every other
//! feature take its worst value gives the score `-phi + sum_{i in S} delta_i`.
//! `S` is sufficient for the prediction exactly when that score stays on the
//! accepted side. Minimising `|S|` is a unit-cost knapsack, solved by taking
//! the largest deltas first.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::xlc::SlackProfile;

/// Sorted set of 0-based feature indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureSet(Vec<usize>);

impl FeatureSet {
    pub fn empty() -> Self {
        FeatureSet(Vec::new())
    }

    pub fn all(m: usize) -> Self {
        FeatureSet((0..m).collect())
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        FeatureSet(v)
    }

    /// Validates the indices against a feature count.
    pub fn checked(indices: impl IntoIterator<Item = usize>, m: usize) -> Result<Self> {
        let s = Self::from_indices(indices);
        if let Some(&bad) = s.0.iter().find(|&&i| i >= m) {
            return Err(Error::DomainMismatch(format!(
                "feature index {} out of range (model has {m} features)",
                bad + 1
            )));
        }
        Ok(s)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &FeatureSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn without(&self, i: usize) -> FeatureSet {
        FeatureSet(self.0.iter().copied().filter(|&j| j != i).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Membership mask over `m` features.
    pub fn mask(&self, m: usize) -> Vec<bool> {
        let mut mask = vec![false; m];
        for &i in &self.0 {
            mask[i] = true;
        }
        mask
    }
}

impl fmt::Display for FeatureSet {
    /// 1-based, e.g. `{1, 2, 5}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// Worst-case score with the features of `s` fixed: `-phi + sum_{i in s} delta_i`.
pub fn fixed_margin(slack: &SlackProfile, s: &FeatureSet) -> f64 {
    -slack.phi + s.iter().map(|i| slack.deltas[i]).sum::<f64>()
}

/// Whether fixing `s` guarantees the prediction for every completion.
pub fn is_weak_axp(slack: &SlackProfile, s: &FeatureSet) -> bool {
    slack.accepts_margin(fixed_margin(slack, s))
}

/// Features ordered by decreasing delta, ties by ascending index.
pub fn order_by_delta_desc(slack: &SlackProfile) -> Vec<usize> {
    let mut order: Vec<usize> = (0..slack.num_features()).collect();
    order.sort_by(|&a, &b| slack.deltas[b].total_cmp(&slack.deltas[a]).then(a.cmp(&b)));
    order
}

/// Cardinality-minimal abductive explanation.
///
/// Returns the shortest prefix of the features sorted by decreasing delta
/// whose fixed margin is accepted.
pub fn compute_axp(slack: &SlackProfile) -> Result<FeatureSet> {
    if !slack.accepts_margin(slack.gamma) {
        return Err(Error::NotPredictedPositive(slack.gamma));
    }
    let order = order_by_delta_desc(slack);
    // Prefixes are re-checked through `is_weak_axp` so the returned set
    // agrees with it bit for bit.
    for k in 0..=order.len() {
        let prefix = FeatureSet::from_indices(order[..k].iter().copied());
        if is_weak_axp(slack, &prefix) {
            return Ok(prefix);
        }
    }
    Ok(FeatureSet::all(order.len()))
}

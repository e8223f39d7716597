//! Approximate probabilistic abductive explanations.
//!
//! A feature set is a weak PAXp when the fraction of its completions that keep
//! the prediction reaches the threshold. The deletion procedure starts from an
//! AXp, frees every feature outside it, then tries to free the AXp features one
//! at a time, keeping each removal that leaves a weak PAXp. Passes repeat until
//! none succeeds, so the result is a weak PAXp from which no single feature can
//! be dropped.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::axp::{compute_axp, FeatureSet};
use crate::count::{precision, CountTable, FixStatus, Slot};
use crate::error::{Error, Result};
use crate::nbc::{Class, Instance, NbcModel};
use crate::threshold::{format_fraction, Threshold};
use crate::xlc::{quantize, QuantizedKnapsack, SlackProfile, Xlc};

/// Default number of decimal places kept when scaling weights to integers.
pub const DEFAULT_DECIMALS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationKind {
    Axp,
    ApproxPaxp,
}

impl std::fmt::Display for ExplanationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExplanationKind::Axp => write!(f, "AXp"),
            ExplanationKind::ApproxPaxp => write!(f, "ApproxPAXp"),
        }
    }
}

/// Order in which seed features are offered for removal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Traversal {
    /// Increasing delta, ties by feature index.
    #[default]
    Delta,
    /// Feature index.
    Lexicographic,
}

/// How tables are managed while the deletion loop runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TableReuse {
    /// One table, rows above a toggled feature recomputed.
    #[default]
    Incremental,
    /// A new table for every check.
    Fresh,
}

mod fraction_serde {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::threshold::format_fraction(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        crate::threshold::parse_decimal(&s).map_err(serde::de::Error::custom)
    }
}

mod nanos_serde {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_nanos() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_nanos(u64::deserialize(d)?))
    }
}

/// Result of explaining one prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub kind: ExplanationKind,
    pub class: Class,
    pub features: FeatureSet,
    #[serde(with = "fraction_serde")]
    pub precision: BigRational,
    pub delta: Threshold,
    /// The AXp the deletion loop started from.
    pub seed: FeatureSet,
    /// True when the real-valued AXp was not a weak PAXp of the quantized
    /// classifier and the seed was recomputed on the integer weights.
    pub reseeded: bool,
    pub decimals: u32,
    /// Time spent in the deletion loop; zero when no trimming was needed.
    #[serde(rename = "trim_nanos", with = "nanos_serde")]
    pub trim_time: Duration,
    #[serde(rename = "total_nanos", with = "nanos_serde")]
    pub total_time: Duration,
}

impl Explanation {
    pub fn precision_fraction(&self) -> String {
        format_fraction(&self.precision)
    }
}

/// Whether fixing `s` to `v` keeps at least a `delta` fraction of completions
/// in the target class.
pub fn is_weak_paxp(
    qk: &QuantizedKnapsack,
    v: &Instance,
    s: &FeatureSet,
    delta: &Threshold,
) -> Result<bool> {
    Ok(delta.is_met_by(&precision(qk, v, s)?))
}

/// Order in which the deletion loop visits the features of `seed`.
pub fn traversal_order(
    slack: &SlackProfile,
    seed: &FeatureSet,
    traversal: Traversal,
) -> Vec<usize> {
    let mut order: Vec<usize> = seed.iter().collect();
    if traversal == Traversal::Delta {
        order.sort_by(|&a, &b| slack.deltas[a].total_cmp(&slack.deltas[b]).then(a.cmp(&b)));
    }
    order
}

/// Deletion-based ApproxPAXp starting from `seed`, visiting features in
/// `order` (which must list every seed feature).
pub fn approx_paxp(
    qk: &QuantizedKnapsack,
    v: &Instance,
    delta: &Threshold,
    seed: &FeatureSet,
    order: &[usize],
) -> Result<FeatureSet> {
    approx_paxp_with(qk, v, delta, seed, order, TableReuse::Incremental)
}

pub fn approx_paxp_with(
    qk: &QuantizedKnapsack,
    v: &Instance,
    delta: &Threshold,
    seed: &FeatureSet,
    order: &[usize],
    reuse: TableReuse,
) -> Result<FeatureSet> {
    qk.check(v)?;
    let m = qk.num_features();
    let seed = FeatureSet::checked(seed.iter(), m)?;
    if FeatureSet::from_indices(order.iter().copied()) != seed || order.len() != seed.len() {
        return Err(Error::DomainMismatch(
            "traversal order must list each seed feature once".into(),
        ));
    }

    // Non-seed features stay free, so they go at the bottom of the table; the
    // first feature visited sits on the top row.
    let mut rows: Vec<usize> = (0..m).filter(|i| !seed.contains(*i)).collect();
    rows.extend(order.iter().rev());
    let mut table = CountTable::with_row_order(qk, FixStatus::from_set(v, &seed), &rows)?;

    let seed_precision = table.precision();
    if !delta.is_met_by(&seed_precision) {
        return Err(Error::SeedNotWeakPaxp {
            precision: format_fraction(&seed_precision),
            delta: delta.to_string(),
        });
    }

    let mut kept = seed.mask(m);
    loop {
        let mut dropped = false;
        for &i in order {
            if !kept[i] {
                continue;
            }
            kept[i] = false;
            let ok = match reuse {
                TableReuse::Incremental => {
                    table.set_slot(i, Slot::Free)?;
                    delta.is_met_by(&table.precision())
                }
                TableReuse::Fresh => {
                    let s = FeatureSet::from_indices((0..m).filter(|&j| kept[j]));
                    is_weak_paxp(qk, v, &s, delta)?
                }
            };
            if ok {
                dropped = true;
            } else {
                kept[i] = true;
                if reuse == TableReuse::Incremental {
                    table.set_slot(i, Slot::Fixed(v.get(i)))?;
                }
            }
        }
        if !dropped {
            break;
        }
    }
    Ok(FeatureSet::from_indices((0..m).filter(|&j| kept[j])))
}

/// Settings for [`explain`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExplainConfig {
    pub delta: Threshold,
    /// AXps no longer than this are returned as they are.
    pub target_size: usize,
    pub decimals: u32,
    pub traversal: Traversal,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            delta: "0.95".parse().expect("valid threshold"),
            target_size: 7,
            decimals: DEFAULT_DECIMALS,
            traversal: Traversal::Delta,
        }
    }
}

/// Explains `model`'s prediction on `v`: an AXp when it is already within the
/// target size, otherwise an ApproxPAXp trimmed from that AXp.
pub fn explain(model: &NbcModel, v: &Instance, cfg: &ExplainConfig) -> Result<Explanation> {
    let start = Instant::now();
    let (class, _) = model.predict(v)?;
    let xlc = Xlc::reduce(model).toward(class);
    explain_xlc(&xlc, v, cfg, start)
}

/// [`explain`] for a classifier already in XLC form; the explained class is
/// the XLC's prediction on `v`.
pub fn explain_reduced(xlc: &Xlc, v: &Instance, cfg: &ExplainConfig) -> Result<Explanation> {
    let start = Instant::now();
    let class = xlc.predict(v)?;
    explain_xlc(&xlc.toward(class), v, cfg, start)
}

fn explain_xlc(
    xlc: &Xlc,
    v: &Instance,
    cfg: &ExplainConfig,
    start: Instant,
) -> Result<Explanation> {
    let class = xlc.target();
    let slack = xlc.slack(v)?;
    let axp = compute_axp(&slack)?;

    if axp.len() <= cfg.target_size {
        return Ok(Explanation {
            kind: ExplanationKind::Axp,
            class,
            features: axp.clone(),
            precision: BigRational::one(),
            delta: cfg.delta.clone(),
            seed: axp,
            reseeded: false,
            decimals: cfg.decimals,
            trim_time: Duration::ZERO,
            total_time: start.elapsed(),
        });
    }

    let trim_start = Instant::now();
    let qk = quantize(xlc, cfg.decimals)?;
    let (seed, reseeded) = if cfg.delta.is_met_by(&precision(&qk, v, &axp)?) {
        (axp, false)
    } else {
        // Rounding moved the boundary; fall back to an AXp of the integer
        // classifier, which has precision exactly 1 there.
        let q_slack = qk.slack(v)?;
        (compute_axp(&q_slack)?, true)
    };
    let order = traversal_order(&slack, &seed, cfg.traversal);
    let features = approx_paxp(&qk, v, &cfg.delta, &seed, &order)?;
    let prec = precision(&qk, v, &features)?;
    let trim_time = trim_start.elapsed();

    Ok(Explanation {
        kind: ExplanationKind::ApproxPaxp,
        class,
        features,
        precision: prec,
        delta: cfg.delta.clone(),
        seed,
        reseeded,
        decimals: cfg.decimals,
        trim_time,
        total_time: start.elapsed(),
    })
}

/// Re-checks an explanation from scratch with a fresh table: the features are
/// a subset of the seed, the precision is what it claims and reaches the
/// threshold, and (for trimmed results) no single feature can be dropped.
pub fn audit(model: &NbcModel, v: &Instance, e: &Explanation) -> Result<bool> {
    let (class, _) = model.predict(v)?;
    if class != e.class || !e.features.is_subset(&e.seed) {
        return Ok(false);
    }
    let xlc = Xlc::reduce(model).toward(class);
    match e.kind {
        ExplanationKind::Axp => {
            let slack = xlc.slack(v)?;
            Ok(e.precision.is_one() && crate::axp::is_weak_axp(&slack, &e.features))
        }
        ExplanationKind::ApproxPaxp => {
            let qk = quantize(&xlc, e.decimals)?;
            let p = precision(&qk, v, &e.features)?;
            if p != e.precision || !e.delta.is_met_by(&p) {
                return Ok(false);
            }
            for i in e.features.iter() {
                if is_weak_paxp(&qk, v, &e.features.without(i), &e.delta)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

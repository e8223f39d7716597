//! Brute-force reference implementations.
//!
//! Everything here enumerates points and evaluates the classifier directly.
//! None of it touches the counting table, so it can be used to check it.

use num_bigint::BigUint;
use num_rational::BigRational;

use crate::axp::FeatureSet;
use crate::count::{ratio, FixStatus, Slot};
use crate::error::{Error, Result};
use crate::nbc::{Class, Instance, NbcModel};
use crate::threshold::Threshold;
use crate::xlc::QuantizedKnapsack;

/// Largest number of points any oracle will enumerate.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// Largest feature count accepted by [`brute_min_paxp`].
pub const MAX_SUBSET_FEATURES: usize = 12;

fn guard(points: u128) -> Result<()> {
    if points > ENUMERATION_CAP {
        return Err(Error::SpaceTooLarge {
            points,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

fn space(sizes: &[usize], free: &[bool]) -> u128 {
    sizes
        .iter()
        .zip(free)
        .filter(|(_, &f)| f)
        .try_fold(1u128, |acc, (&d, _)| acc.checked_mul(d as u128))
        .unwrap_or(u128::MAX)
}

/// Calls `visit` on every completion of `base` over the `free` positions.
fn for_each_completion(
    base: &[usize],
    sizes: &[usize],
    free: &[bool],
    mut visit: impl FnMut(&[usize]),
) {
    let mut x = base.to_vec();
    let slots: Vec<usize> = (0..x.len()).filter(|&i| free[i]).collect();
    for &i in &slots {
        x[i] = 0;
    }
    loop {
        visit(&x);
        let mut carry = true;
        for &i in &slots {
            x[i] += 1;
            if x[i] < sizes[i] {
                carry = false;
                break;
            }
            x[i] = 0;
        }
        if carry {
            return;
        }
    }
}

/// Counts completions of `status` whose knapsack weight sum is below the
/// right-hand side.
pub fn brute_count(qk: &QuantizedKnapsack, status: &FixStatus) -> Result<BigUint> {
    if status.len() != qk.num_features() {
        return Err(Error::DomainMismatch(
            "status length differs from the knapsack".into(),
        ));
    }
    let sizes = qk.domain_sizes();
    let free: Vec<bool> = status.slots().iter().map(|s| *s == Slot::Free).collect();
    guard(space(&sizes, &free))?;
    let mut base = vec![0; sizes.len()];
    for (i, s) in status.slots().iter().enumerate() {
        if let Slot::Fixed(v) = *s {
            if v >= sizes[i] {
                return Err(Error::DomainMismatch(format!(
                    "fixed value out of range for feature {}",
                    i + 1
                )));
            }
            base[i] = v;
        }
    }
    let mut n: u64 = 0;
    for_each_completion(&base, &sizes, &free, |x| {
        let sum: i128 = x
            .iter()
            .zip(&qk.groups)
            .map(|(&v, g)| g.weights[g.value_to_group[v]] as i128)
            .sum();
        if sum < qk.rhs as i128 {
            n += 1;
        }
    });
    Ok(BigUint::from(n))
}

fn sizes_of(model: &NbcModel) -> Vec<usize> {
    model.features().iter().map(|f| f.size()).collect()
}

fn predict(model: &NbcModel, x: &[usize]) -> Class {
    // Direct evaluation of the log-joint, tie to negative.
    let mut pos = model.log_prior(Class::Positive);
    let mut neg = model.log_prior(Class::Negative);
    for (i, &v) in x.iter().enumerate() {
        pos += model.log_likelihood(i, v, Class::Positive);
        neg += model.log_likelihood(i, v, Class::Negative);
    }
    if pos > neg {
        Class::Positive
    } else {
        Class::Negative
    }
}

/// Fraction of completions of `v` on `s` predicted as `v`'s class, by
/// enumeration.
pub fn brute_precision(model: &NbcModel, v: &Instance, s: &FeatureSet) -> Result<BigRational> {
    v.conforms(model.features())?;
    let sizes = sizes_of(model);
    let free: Vec<bool> = (0..sizes.len()).map(|i| !s.contains(i)).collect();
    let total = space(&sizes, &free);
    guard(total)?;
    let class = predict(model, v.values());
    let mut hits = 0u64;
    for_each_completion(v.values(), &sizes, &free, |x| {
        if predict(model, x) == class {
            hits += 1;
        }
    });
    Ok(ratio(BigUint::from(hits), BigUint::from(total as u64)))
}

/// Whether `x` is an AXp of `v`: every completion keeps the prediction, and
/// dropping any one feature lets some completion change it.
pub fn check_axp(model: &NbcModel, v: &Instance, x: &FeatureSet) -> Result<bool> {
    v.conforms(model.features())?;
    let sizes = sizes_of(model);
    let class = predict(model, v.values());
    let holds = |s: &FeatureSet| -> Result<bool> {
        let free: Vec<bool> = (0..sizes.len()).map(|i| !s.contains(i)).collect();
        guard(space(&sizes, &free))?;
        let mut all = true;
        for_each_completion(v.values(), &sizes, &free, |p| {
            if all && predict(model, p) != class {
                all = false;
            }
        });
        Ok(all)
    };
    if !holds(x)? {
        return Ok(false);
    }
    for i in x.iter() {
        if holds(&x.without(i))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest feature set whose enumerated precision reaches `delta`; ties go
/// to the lexicographically smallest sorted index list.
pub fn brute_min_paxp(model: &NbcModel, v: &Instance, delta: &Threshold) -> Result<FeatureSet> {
    v.conforms(model.features())?;
    let m = model.num_features();
    if m > MAX_SUBSET_FEATURES {
        return Err(Error::SpaceTooLarge {
            points: 1u128 << m,
            cap: 1u128 << MAX_SUBSET_FEATURES,
        });
    }
    let sizes = sizes_of(model);
    let everything = vec![true; m];
    guard(space(&sizes, &everything))?;

    // Bucket every point by the set of features on which it agrees with v.
    let class = predict(model, v.values());
    let mut total = vec![0u64; 1 << m];
    let mut same = vec![0u64; 1 << m];
    for_each_completion(v.values(), &sizes, &everything, |x| {
        let agree = (0..m)
            .filter(|&i| x[i] == v.get(i))
            .fold(0usize, |acc, i| acc | 1 << i);
        total[agree] += 1;
        if predict(model, x) == class {
            same[agree] += 1;
        }
    });
    // Superset sums: points consistent with S are those agreeing on a superset.
    for i in 0..m {
        for mask in 0..1usize << m {
            if mask & (1 << i) == 0 {
                total[mask] += total[mask | 1 << i];
                same[mask] += same[mask | 1 << i];
            }
        }
    }

    let mut best: Option<(usize, Vec<usize>)> = None;
    for mask in 0..1usize << m {
        let p = ratio(BigUint::from(same[mask]), BigUint::from(total[mask]));
        if !delta.is_met_by(&p) {
            continue;
        }
        let members: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
        let better = match &best {
            None => true,
            Some((n, b)) => members.len() < *n || (members.len() == *n && members < *b),
        };
        if better {
            best = Some((members.len(), members));
        }
    }
    let (_, members) = best.expect("the full feature set has precision 1");
    Ok(FeatureSet::from_indices(members))
}

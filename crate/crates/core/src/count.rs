//! Pseudo-polynomial model counting over a quantized knapsack.
//!
//! `C(k, r)` is the number of assignments to the first `k` table rows whose
//! weight sum is at most `r`. A free row sums over its weight groups,
//! `C(k, r) = sum_g n_g * C(k-1, r - w_g)`, while a fixed row follows its single
//! value, `C(k, r) = C(k-1, r - w_l)`. `C(0, r)` is 1 for `r >= 0` and every
//! cell with `r < 0` is 0. The number of accepted points is `C(m, W-1)`.
//!
//! Cells are filled top-down on demand. Rows whose partial sums cannot reach
//! `r` short-circuit to 0 or to the full product of their free domains, so
//! only the band of residuals where the answer is actually in doubt is
//! memoised. The table rows can be laid out in any feature order; changing
//! one feature's status drops the memo of its row and every row above it.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::axp::FeatureSet;
use crate::error::{Error, Result};
use crate::nbc::Instance;
use crate::xlc::{QuantizedKnapsack, WeightGroups};

/// Whether a feature ranges over its domain or is pinned to one value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Free,
    Fixed(usize),
}

/// Per-feature free/fixed status.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FixStatus(Vec<Slot>);

impl FixStatus {
    pub fn all_free(m: usize) -> Self {
        FixStatus(vec![Slot::Free; m])
    }

    pub fn new(slots: Vec<Slot>) -> Self {
        FixStatus(slots)
    }

    /// Features of `s` fixed to their values in `v`, the rest free.
    pub fn from_set(v: &Instance, s: &FeatureSet) -> Self {
        FixStatus(
            (0..v.len())
                .map(|i| {
                    if s.contains(i) {
                        Slot::Fixed(v.get(i))
                    } else {
                        Slot::Free
                    }
                })
                .collect(),
        )
    }

    pub fn slots(&self) -> &[Slot] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Slot {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, slot: Slot) {
        self.0[i] = slot;
    }

    /// Number of completions: product of the free domain sizes.
    pub fn free_space(&self, sizes: &[usize]) -> BigUint {
        self.0
            .iter()
            .zip(sizes)
            .filter(|(s, _)| matches!(s, Slot::Free))
            .fold(BigUint::one(), |acc, (_, &d)| acc * BigUint::from(d))
    }

    fn check(&self, qk: &QuantizedKnapsack) -> Result<()> {
        if self.0.len() != qk.num_features() {
            return Err(Error::DomainMismatch(format!(
                "status covers {} features, knapsack has {}",
                self.0.len(),
                qk.num_features()
            )));
        }
        for (i, (s, g)) in self.0.iter().zip(&qk.groups).enumerate() {
            check_slot(i, *s, g)?;
        }
        Ok(())
    }
}

fn check_slot(feature: usize, slot: Slot, g: &WeightGroups) -> Result<()> {
    match slot {
        Slot::Fixed(v) if v >= g.domain_size() => Err(Error::DomainMismatch(format!(
            "fixed value index {v} out of range for feature {} (domain size {})",
            feature + 1,
            g.domain_size()
        ))),
        _ => Ok(()),
    }
}

/// Cell arithmetic. `u128` is used whenever the feature space fits in it.
trait Count: Clone {
    fn nil() -> Self;
    fn unit() -> Self;
    /// `self += n * other`
    fn add_scaled(&mut self, other: &Self, n: u64);
    fn mul_u64(&self, n: u64) -> Self;
    fn to_big(&self) -> BigUint;
}

impl Count for u128 {
    fn nil() -> Self {
        0
    }
    fn unit() -> Self {
        1
    }
    fn add_scaled(&mut self, other: &Self, n: u64) {
        *self += *other * n as u128;
    }
    fn mul_u64(&self, n: u64) -> Self {
        *self * n as u128
    }
    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Count for BigUint {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn add_scaled(&mut self, other: &Self, n: u64) {
        if n == 1 {
            *self += other;
        } else {
            *self += other * n;
        }
    }
    fn mul_u64(&self, n: u64) -> Self {
        self * n
    }
    fn to_big(&self) -> BigUint {
        self.clone()
    }
}

#[derive(Debug, Clone)]
struct Row<C> {
    feature: usize,
    /// Smallest and largest weight sum over rows `1..=k` under the current
    /// status; residuals outside `[lo, hi)` need no table cell.
    lo: i64,
    hi: i64,
    /// Product of the free domain sizes of rows `1..=k`.
    full: C,
    /// Residual window that queries from the top row can ever reach.
    win_lo: i64,
    win_len: usize,
    memo: Vec<Option<C>>,
}

#[derive(Debug, Clone)]
struct Table<'a, C> {
    qk: &'a QuantizedKnapsack,
    status: FixStatus,
    rows: Vec<Row<C>>,
    evaluated: usize,
}

impl<'a, C: Count> Table<'a, C> {
    fn new(qk: &'a QuantizedKnapsack, status: FixStatus, order: &[usize]) -> Self {
        let top = qk.rhs - 1;
        let m = order.len();
        // Static bounds, independent of the status.
        let mut below_min = vec![0i64; m + 1];
        let mut below_max = vec![0i64; m + 1];
        for (k, &f) in order.iter().enumerate() {
            below_min[k + 1] = below_min[k] + qk.groups[f].min_weight() as i64;
            below_max[k + 1] = below_max[k] + qk.groups[f].max_weight() as i64;
        }
        let (total_min, total_max) = (below_min[m], below_max[m]);
        let rows = order
            .iter()
            .enumerate()
            .map(|(k, &feature)| {
                let above_min = total_min - below_min[k + 1];
                let above_max = total_max - below_max[k + 1];
                let reach_lo = top - above_max;
                let reach_hi = top - above_min;
                let win_lo = reach_lo.max(below_min[k + 1]);
                let win_hi = reach_hi.min(below_max[k + 1] - 1);
                let win_len = if win_hi >= win_lo {
                    (win_hi - win_lo + 1) as usize
                } else {
                    0
                };
                Row {
                    feature,
                    lo: 0,
                    hi: 0,
                    full: C::unit(),
                    win_lo,
                    win_len,
                    memo: Vec::new(),
                }
            })
            .collect();
        let mut t = Table {
            qk,
            status,
            rows,
            evaluated: 0,
        };
        t.refresh_from(0);
        t
    }

    /// Recomputes bounds and drops memoised cells for rows `from..`.
    fn refresh_from(&mut self, from: usize) {
        let (mut lo, mut hi, mut full) = if from == 0 {
            (0, 0, C::unit())
        } else {
            let r = &self.rows[from - 1];
            (r.lo, r.hi, r.full.clone())
        };
        for row in &mut self.rows[from..] {
            let g = &self.qk.groups[row.feature];
            match self.status.get(row.feature) {
                Slot::Fixed(v) => {
                    let w = g.weight_of(v) as i64;
                    lo += w;
                    hi += w;
                }
                Slot::Free => {
                    lo += g.min_weight() as i64;
                    hi += g.max_weight() as i64;
                    full = full.mul_u64(g.domain_size() as u64);
                }
            }
            row.lo = lo;
            // exclusive: r >= hi means every assignment fits
            row.hi = hi;
            row.full = full.clone();
            row.memo.clear();
        }
    }

    fn set(&mut self, feature: usize, slot: Slot, position: usize) {
        if self.status.get(feature) != slot {
            self.status.set(feature, slot);
            self.refresh_from(position);
        }
    }

    /// `C(k, r)` with `k` rows (1-based count).
    fn cell(&mut self, k: usize, r: i64) -> C {
        if r < 0 {
            return C::nil();
        }
        if k == 0 {
            return C::unit();
        }
        let idx = k - 1;
        let (lo, hi, win_lo, win_len, feature) = {
            let row = &self.rows[idx];
            (row.lo, row.hi, row.win_lo, row.win_len, row.feature)
        };
        if r < lo {
            return C::nil();
        }
        if r >= hi {
            return self.rows[idx].full.clone();
        }
        let off = r - win_lo;
        let in_window = off >= 0 && (off as usize) < win_len;
        if in_window {
            let row = &mut self.rows[idx];
            if row.memo.is_empty() {
                row.memo.resize(win_len, None);
            }
            if let Some(c) = &row.memo[off as usize] {
                return c.clone();
            }
        }
        let qk = self.qk;
        let g = &qk.groups[feature];
        let value = match self.status.get(feature) {
            Slot::Fixed(v) => self.cell(k - 1, r - g.weight_of(v) as i64),
            Slot::Free => {
                let mut acc = C::nil();
                for (&w, &n) in g.weights.iter().zip(&g.counts) {
                    let below = r - w as i64;
                    if below < 0 {
                        // weights are increasing
                        break;
                    }
                    let c = self.cell(k - 1, below);
                    acc.add_scaled(&c, n);
                }
                acc
            }
        };
        self.evaluated += 1;
        if in_window {
            self.rows[idx].memo[off as usize] = Some(value.clone());
        }
        value
    }

    fn count(&mut self) -> BigUint {
        let m = self.rows.len();
        self.cell(m, self.qk.rhs - 1).to_big()
    }
}

#[derive(Debug, Clone)]
enum Cells<'a> {
    Small(Table<'a, u128>),
    Big(Table<'a, BigUint>),
}

/// Memoised counting table for one explanation session.
///
/// Not meant to be shared between threads while it is being updated; build one
/// table per instance.
#[derive(Debug, Clone)]
pub struct CountTable<'a> {
    cells: Cells<'a>,
    /// Table row holding each feature.
    position: Vec<usize>,
    sizes: Vec<usize>,
}

impl<'a> CountTable<'a> {
    /// Table with rows in feature order.
    pub fn new(qk: &'a QuantizedKnapsack, status: FixStatus) -> Result<Self> {
        let order: Vec<usize> = (0..qk.num_features()).collect();
        Self::with_row_order(qk, status, &order)
    }

    /// Table whose row `k` holds feature `order[k]`. Features toggled often
    /// should come last so that fewer rows are invalidated.
    pub fn with_row_order(
        qk: &'a QuantizedKnapsack,
        status: FixStatus,
        order: &[usize],
    ) -> Result<Self> {
        status.check(qk)?;
        let m = qk.num_features();
        let mut position = vec![usize::MAX; m];
        for (k, &f) in order.iter().enumerate() {
            if f >= m || position[f] != usize::MAX {
                return Err(Error::DomainMismatch(
                    "row order must be a permutation of the features".into(),
                ));
            }
            position[f] = k;
        }
        if order.len() != m {
            return Err(Error::DomainMismatch(
                "row order must be a permutation of the features".into(),
            ));
        }
        let sizes = qk.domain_sizes();
        let fits = sizes
            .iter()
            .try_fold(1u128, |acc, &d| acc.checked_mul(d as u128))
            .is_some_and(|p| p < u128::MAX);
        let cells = if fits {
            Cells::Small(Table::new(qk, status, order))
        } else {
            Cells::Big(Table::new(qk, status, order))
        };
        Ok(CountTable {
            cells,
            position,
            sizes,
        })
    }

    pub fn status(&self) -> &FixStatus {
        match &self.cells {
            Cells::Small(t) => &t.status,
            Cells::Big(t) => &t.status,
        }
    }

    /// Changes one feature's status, invalidating its row and those above it.
    pub fn set_slot(&mut self, feature: usize, slot: Slot) -> Result<()> {
        let qk = match &self.cells {
            Cells::Small(t) => t.qk,
            Cells::Big(t) => t.qk,
        };
        if feature >= qk.num_features() {
            return Err(Error::DomainMismatch(format!(
                "feature index {} out of range",
                feature + 1
            )));
        }
        check_slot(feature, slot, &qk.groups[feature])?;
        let pos = self.position[feature];
        match &mut self.cells {
            Cells::Small(t) => t.set(feature, slot, pos),
            Cells::Big(t) => t.set(feature, slot, pos),
        }
        Ok(())
    }

    /// Number of accepted points consistent with the current status.
    pub fn count(&mut self) -> BigUint {
        match &mut self.cells {
            Cells::Small(t) => t.count(),
            Cells::Big(t) => t.count(),
        }
    }

    /// Number of completions of the current status.
    pub fn free_space(&self) -> BigUint {
        self.status().free_space(&self.sizes)
    }

    /// Accepted fraction of the completions, exact.
    pub fn precision(&mut self) -> BigRational {
        let n = self.count();
        ratio(n, self.free_space())
    }

    /// Table cells computed so far (memo hits excluded).
    pub fn cells_evaluated(&self) -> usize {
        match &self.cells {
            Cells::Small(t) => t.evaluated,
            Cells::Big(t) => t.evaluated,
        }
    }

    /// Whether the `u128` fast path is in use.
    pub fn uses_machine_words(&self) -> bool {
        matches!(self.cells, Cells::Small(_))
    }
}

pub(crate) fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Number of accepted points consistent with `status`.
pub fn count_models(qk: &QuantizedKnapsack, status: &FixStatus) -> Result<BigUint> {
    Ok(CountTable::new(qk, status.clone())?.count())
}

/// Number of points consistent with `status` that are *not* accepted.
pub fn count_complement(qk: &QuantizedKnapsack, status: &FixStatus) -> Result<BigUint> {
    let n = count_models(qk, status)?;
    Ok(status.free_space(&qk.domain_sizes()) - n)
}

/// Probability that a uniformly drawn completion of `v` on `s` stays in the
/// target class.
pub fn precision(qk: &QuantizedKnapsack, v: &Instance, s: &FeatureSet) -> Result<BigRational> {
    qk.check(v)?;
    if let Some(&bad) = s.indices().iter().find(|&&i| i >= qk.num_features()) {
        return Err(Error::DomainMismatch(format!(
            "feature index {} out of range",
            bad + 1
        )));
    }
    let mut t = CountTable::new(qk, FixStatus::from_set(v, s))?;
    Ok(t.precision())
}

/// Lossy view of an exact precision, for reporting only.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

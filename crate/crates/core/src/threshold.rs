//! Exact precision thresholds.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A precision threshold in `(0, 1]`, held as an exact fraction.
///
/// Parsed from decimal text (`"0.95"` becomes `19/20`) or from a fraction
/// (`"17/27"`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Threshold(BigRational);

impl Threshold {
    pub fn new(r: BigRational) -> Result<Self> {
        if !r.is_positive() || r > BigRational::one() {
            return Err(Error::InvalidThreshold(format!(
                "threshold must lie in (0, 1], got {r}"
            )));
        }
        Ok(Threshold(r))
    }

    pub fn one() -> Self {
        Threshold(BigRational::one())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    /// Whether an exact precision reaches the threshold.
    pub fn is_met_by(&self, precision: &BigRational) -> bool {
        precision >= &self.0
    }

    pub fn as_f64(&self) -> f64 {
        crate::count::to_f64(&self.0)
    }
}

/// Parses `"0.95"`, `"1"`, `".9"`, `"95e-2"` or `"19/20"` into an exact
/// fraction.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidThreshold(format!("cannot parse '{s}' as a number"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if shift >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-shift) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Threshold::new(parse_decimal(s)?)
    }
}

impl TryFrom<String> for Threshold {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Threshold> for String {
    fn from(t: Threshold) -> String {
        format_fraction(&t.0)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_fraction(&self.0))
    }
}

/// Always `p/q`, including `1/1`.
pub fn format_fraction(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Percentage with two decimals, e.g. `61.73`.
pub fn format_percent(r: &BigRational) -> String {
    format!("{:.2}", crate::count::to_f64(r) * 100.0)
}

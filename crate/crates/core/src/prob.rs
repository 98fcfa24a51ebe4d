//! Exact rational and log-domain probabilities.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Worst-case absolute error of [`ExactProb::log2`] in bits, for values whose
/// numerator and denominator are both exactly representable or at least
/// 53 bits wide.
pub const LOG2_CONVERSION_EPS: f64 = 1e-12;

/// An exact probability in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProb(BigRational);

impl ExactProb {
    pub fn new(value: BigRational) -> Result<Self> {
        if value.is_negative() || value > BigRational::one() {
            return Err(Error::InvalidArgument(format!(
                "{value} is not a probability"
            )));
        }
        Ok(Self(value))
    }

    /// `favourable / total`; `total` must be nonzero and at least `favourable`.
    pub fn from_counts(favourable: BigUint, total: BigUint) -> Result<Self> {
        if total.is_zero() {
            return Err(Error::InvalidArgument("empty sample space".into()));
        }
        Self::new(BigRational::new(favourable.into(), total.into()))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn complement(&self) -> Self {
        Self(BigRational::one() - &self.0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn pow(&self, exponent: u32) -> Self {
        Self(num_traits::pow(self.0.clone(), exponent as usize))
    }

    pub fn to_f64(&self) -> f64 {
        self.log2().to_f64()
    }

    /// Log-domain image; monotone, and exact at 0 and 1.
    pub fn log2(&self) -> LogProb {
        if self.0.is_zero() {
            return LogProb::ZERO;
        }
        LogProb(log2_biguint(self.0.numer().magnitude()) - log2_biguint(self.0.denom().magnitude()))
    }

    /// `"num/den"` with an explicit denominator.
    pub fn to_ratio_string(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ratio_string())
    }
}

fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap_or(u64::MAX) as f64).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX);
    shift as f64 + (top as f64).log2()
}

/// Base-2 logarithm of a probability, in `[-inf, 0]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    /// Clamps tiny positive rounding overshoot to 0; rejects NaN and larger
    /// positive values.
    pub fn from_log2(value: f64) -> Result<Self> {
        if value.is_nan() || value > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "{value} is not a log2 probability"
            )));
        }
        Ok(Self(value.min(0.0)))
    }

    pub fn from_ln(value: f64) -> Result<Self> {
        Self::from_log2(value / std::f64::consts::LN_2)
    }

    pub fn from_f64(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("{p} is not a probability")));
        }
        Ok(Self(p.log2()))
    }

    pub fn log2(self) -> f64 {
        self.0
    }

    pub fn ln(self) -> f64 {
        self.0 * std::f64::consts::LN_2
    }

    pub fn to_f64(self) -> f64 {
        self.0.exp2()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// `p^k` for a real exponent `k >= 0`, with `0^0 = 1`.
    pub fn powf(self, k: f64) -> Self {
        if k == 0.0 {
            Self::ONE
        } else {
            Self(self.0 * k)
        }
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^{}", self.0)
    }
}

/// Natural-log sum of exponentials; `-inf` for an empty input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln(1 - e^x)` for `x <= 0`, accurate at both ends.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Which arithmetic to use for a computation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithPolicy {
    Exact,
    Log,
    #[default]
    Auto,
}

impl std::str::FromStr for ArithPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "log" => Ok(Self::Log),
            "auto" => Ok(Self::Auto),
            other => Err(Error::InvalidArgument(format!(
                "unknown arithmetic policy {other:?}"
            ))),
        }
    }
}

/// A probability carried exactly or in the log domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Prob {
    Exact(ExactProb),
    Log(LogProb),
}

impl Prob {
    pub fn is_exact(&self) -> bool {
        matches!(self, Prob::Exact(_))
    }

    pub fn exact(&self) -> Option<&ExactProb> {
        match self {
            Prob::Exact(e) => Some(e),
            Prob::Log(_) => None,
        }
    }

    pub fn log2(&self) -> f64 {
        match self {
            Prob::Exact(e) => e.log2().log2(),
            Prob::Log(l) => l.log2(),
        }
    }

    pub fn to_log(&self) -> LogProb {
        match self {
            Prob::Exact(e) => e.log2(),
            Prob::Log(l) => *l,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_log().to_f64()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Prob::Exact(e) => e.is_zero(),
            Prob::Log(l) => l.is_zero(),
        }
    }

    /// Exact comparison when both sides are exact, otherwise by log value.
    pub fn cmp_value(&self, other: &Prob) -> Ordering {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => a.cmp(b),
            _ => self.log2().total_cmp(&other.log2()),
        }
    }

    /// Value for CSV cells: `num/den` when exact, otherwise a float.
    pub fn to_cell(&self) -> String {
        match self {
            Prob::Exact(e) => e.to_ratio_string(),
            Prob::Log(l) => format!("{:e}", l.to_f64()),
        }
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prob::Exact(e) => e.fmt(f),
            Prob::Log(l) => l.fmt(f),
        }
    }
}

/// Both tails of an excess-distortion event, each computed directly so that
/// neither loses precision when the other is close to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Tails {
    /// `Pr(d > nD)`.
    pub excess: Prob,
    /// `Pr(d <= nD)`.
    pub within: Prob,
}

impl Tails {
    pub fn exact(excess: ExactProb) -> Self {
        let within = excess.complement();
        Self {
            excess: Prob::Exact(excess),
            within: Prob::Exact(within),
        }
    }

    /// `excess^k` (the chance that `k` independent draws all exceed), exact
    /// when the exact value and `k <= exact_power_limit`, log-domain otherwise.
    pub fn excess_power(&self, k: u128, exact_power_limit: u128) -> Prob {
        match &self.excess {
            Prob::Exact(e) if k <= exact_power_limit => Prob::Exact(e.pow(k as u32)),
            _ => {
                if k == 0 {
                    return Prob::Exact(ExactProb::one());
                }
                Prob::Log(self.excess.to_log().powf(k as f64))
            }
        }
    }
}

/// Exact `favourable / total` from signed big integers (internal helper).
pub(crate) fn ratio(favourable: &BigUint, total: &BigUint) -> Result<ExactProb> {
    ExactProb::new(BigRational::new(
        BigInt::from(favourable.clone()),
        BigInt::from(total.clone()),
    ))
}

//! Exact and Monte Carlo laboratory for the randomized covering-packing
//! duality between source coding and channel coding.
//!
//! The source is uniform on a single type class (the *uniform X source*).
//! Source coding draws codewords uniformly from an output type class and
//! asks whether one lands within distortion `D` of the source word
//! (covering). Channel coding draws codewords uniformly from the source type
//! class and decodes the channel output to the unique codeword within
//! distortion `D` (packing). Both reduce to the same number,
//! `A = min_q Pr(d(U, V_q)/n > D)`, which this crate computes exactly
//! (big rationals) or in the log domain, and checks against simulation.
//!
//! Modules:
//! - [`types`]: alphabets, rational pmfs, types, joint types, permutations.
//! - [`distortion`]: distortion functions and excess-distortion probabilities.
//! - [`covering`]: random source codes, `A`, `beta` and the rate exponent.
//! - [`channel`] and [`packing`]: channel models and the typicality decoder.
//! - [`oracle`]: Blahut-Arimoto and the binary-Hamming closed form.
//! - [`experiments`] (feature `cli`): config-driven grid runs and CSV output.

// `!(x >= 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod covering;
pub mod distortion;
mod error;
pub mod oracle;
pub mod packing;
pub mod prob;
pub mod rng;
pub mod stats;
pub mod types;

#[cfg(feature = "cli")]
pub mod config;
#[cfg(feature = "cli")]
pub mod experiments;

pub use error::{Error, Result};

/// Exact per-letter quantities (distortion levels and matrix entries).
pub type Rational = num_rational::Ratio<i64>;

/// Size knobs shared by the exact and simulation paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest type class, pair set or joint-type set enumerated before
    /// refusing with [`Error::BudgetExceeded`].
    pub enumeration_budget: u64,
    /// Longest block length the `auto` policy computes exactly.
    pub exact_max_blocklength: usize,
    /// Largest power taken of an exact probability before switching to logs.
    pub exact_power_limit: u128,
    /// Codebooks up to this size are drawn word by word in simulations;
    /// larger ones are sampled through the exact law of their hit count.
    pub explicit_codebook_limit: u128,
}

impl Limits {
    pub const DEFAULT: Limits = Limits {
        enumeration_budget: types::DEFAULT_ENUMERATION_BUDGET,
        exact_max_blocklength: 64,
        exact_power_limit: 4096,
        explicit_codebook_limit: 256,
    };
}

impl Default for Limits {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// `2^floor(n * rate)`, the number of codewords at rate `rate` bits/letter.
/// `n * rate` is nudged by 1e-9 before flooring so that decimal rates such
/// as `0.29` at `n = 100` land on the intended integer. Fails when the count
/// does not fit in `u128`.
pub fn codebook_size(blocklength: usize, rate: f64) -> Result<u128> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid rate {rate}")));
    }
    let bits = (blocklength as f64 * rate + 1e-9).floor();
    if bits >= 127.0 {
        return Err(Error::InvalidArgument(format!(
            "codebook of 2^{bits} words is too large"
        )));
    }
    Ok(1u128 << bits as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codebook_size_floors_the_exponent() {
        assert_eq!(codebook_size(8, 0.25).unwrap(), 4);
        assert_eq!(codebook_size(2, 0.49).unwrap(), 1);
        assert_eq!(codebook_size(128, 0.25).unwrap(), 1 << 32);
        assert_eq!(codebook_size(10, 0.0).unwrap(), 1);
        assert_eq!(codebook_size(100, 0.29).unwrap(), 1 << 29);
        assert!(codebook_size(512, 1.0).is_err());
        assert!(codebook_size(4, -0.1).is_err());
    }
}

//! Channel coding by random packing.
//!
//! A codebook of `2^floor(n R)` words is drawn independently and uniformly
//! from the source type class `T_p`. Codeword 0 is sent through the channel
//! and the receiver declares the unique codeword within normalized distortion
//! `D` of the output, or an error. Correct decoding happens with probability
//! at least `-omega + A^(2^floor(nR) - 1)`, where `omega` is the channel's
//! excess-distortion probability on the uniform source and `A` is the
//! covering quantity from [`crate::covering::best_q`].

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;
use serde::Serialize;

use crate::channel::ChannelModel;
use crate::covering::best_q;
use crate::distortion::{excess_prob_fixed_y, excess_tails, DistortionFn, Threshold};
use crate::error::{Error, Result};
use crate::prob::{ArithPolicy, ExactProb, Prob, Tails};
use crate::rng::{run_trials, StreamKey};
use crate::stats::Estimate;
use crate::types::{enumerate_types, sample_uniform, TypeVector};
use crate::{codebook_size, Limits, Rational};

/// Bound value the finite-length achievable-rate surrogate must reach.
pub const RATE_BOUND_TARGET: f64 = 0.99;
/// Rate grid resolution of the surrogate, in bits.
pub const RATE_STEP: f64 = 0.01;
/// Wilson half-widths of slack allowed in [`bound_check`].
pub const BOUND_SLACK_WIDTHS: f64 = 3.0;

/// Monte Carlo estimate of `omega = Pr(d(U, Y)/n > D)` for a channel driven
/// by the uniform source.
#[derive(Clone, Debug, Serialize)]
pub struct DistortionProfile {
    pub blocklength: usize,
    pub estimate: Estimate,
}

impl DistortionProfile {
    pub fn point(&self) -> f64 {
        self.estimate.point()
    }

    /// Upper edge of the 95% Wilson interval.
    pub fn upper(&self) -> f64 {
        self.estimate.wilson().1
    }
}

fn check_channel(ch: &dyn ChannelModel, p: &TypeVector, d: &dyn DistortionFn) -> Result<()> {
    if ch.input_size() != p.alphabet_size() || ch.input_size() != d.input_size() {
        return Err(Error::InvalidArgument(format!(
            "channel input alphabet ({}) must match the source ({}) and distortion ({})",
            ch.input_size(),
            p.alphabet_size(),
            d.input_size()
        )));
    }
    if ch.output_size() != d.output_size() {
        return Err(Error::InvalidArgument(format!(
            "channel output alphabet ({}) must match the distortion ({})",
            ch.output_size(),
            d.output_size()
        )));
    }
    Ok(())
}

pub fn estimate_omega(
    ch: &dyn ChannelModel,
    p: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    trials: u64,
    key: &StreamKey,
) -> Result<DistortionProfile> {
    check_channel(ch, p, d)?;
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    let threshold = Threshold::for_fn(d, p.n(), level)?;
    let [excess] = run_trials(key, trials, |_, rng| {
        let u = sample_uniform(p, rng);
        let y = ch.transmit(&u, rng);
        [u64::from(threshold.exceeds(d.scaled_total(&u, &y)))]
    });
    Ok(DistortionProfile {
        blocklength: p.n(),
        estimate: Estimate::new(excess, trials),
    })
}

/// What the unique-typicality decoder did in one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    Correct,
    /// A single typical codeword, but not the transmitted one.
    WrongUnique,
    NoneTypical,
    Ambiguous,
}

impl DecodeOutcome {
    fn from_counts(transmitted_typical: bool, impostors: u64) -> Self {
        match (transmitted_typical, impostors) {
            (true, 0) => DecodeOutcome::Correct,
            (false, 1) => DecodeOutcome::WrongUnique,
            (false, 0) => DecodeOutcome::NoneTypical,
            _ => DecodeOutcome::Ambiguous,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Index of the unique codeword within the threshold of `y`, if exactly one.
pub fn decode(
    y: &[usize],
    codebook: &[Vec<usize>],
    threshold: Threshold,
    d: &dyn DistortionFn,
) -> Option<usize> {
    let mut found = None;
    for (i, c) in codebook.iter().enumerate() {
        if !threshold.exceeds(d.scaled_total(c, y)) {
            if found.is_some() {
                return None;
            }
            found = Some(i);
        }
    }
    found
}

#[derive(Clone, Debug, Serialize)]
pub struct PackingResult {
    pub blocklength: usize,
    pub rate: f64,
    pub codebook_size: u128,
    pub trials: u64,
    pub correct: u64,
    pub wrong_unique: u64,
    pub none_typical: u64,
    pub ambiguous: u64,
    /// Whether codebooks were drawn word by word (`false`: hit-count law).
    pub explicit: bool,
}

impl PackingResult {
    pub fn correct_estimate(&self) -> Estimate {
        Estimate::new(self.correct, self.trials)
    }

    pub fn correct_rate(&self) -> f64 {
        self.correct_estimate().point()
    }
}

/// Runs the packing experiment over `trials` fresh codebooks.
///
/// Codebooks up to `limits.explicit_codebook_limit` words are drawn word by
/// word. Larger ones are never materialized: given the channel output `y`,
/// the non-transmitted codewords are independent of `y` and each is typical
/// with probability `Pr(d(U, y)/n <= D)`, which depends only on the type of
/// `y`. The decoder only needs to know whether zero, one, or more of them are
/// typical, and those three probabilities are computed in closed form.
#[allow(clippy::too_many_arguments)]
pub fn simulate_packing(
    ch: &dyn ChannelModel,
    p: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    rate: f64,
    trials: u64,
    key: &StreamKey,
    policy: ArithPolicy,
    limits: &Limits,
) -> Result<PackingResult> {
    check_channel(ch, p, d)?;
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    let size = codebook_size(p.n(), rate)?;
    let threshold = Threshold::for_fn(d, p.n(), level)?;
    let explicit = size <= limits.explicit_codebook_limit;
    let impostors = size - 1;

    let counts = if explicit {
        run_trials::<4, _>(key, trials, |_, rng| {
            let sent = sample_uniform(p, rng);
            let y = ch.transmit(&sent, rng);
            let own = !threshold.exceeds(d.scaled_total(&sent, &y));
            let mut typical = 0u64;
            for _ in 0..impostors {
                let other = sample_uniform(p, rng);
                if !threshold.exceeds(d.scaled_total(&other, &y)) {
                    typical += 1;
                    if typical >= 2 {
                        break;
                    }
                }
            }
            let mut out = [0; 4];
            out[DecodeOutcome::from_counts(own, typical).slot()] = 1;
            out
        })
    } else {
        let laws = ImpostorLaws::new(p, level, d, impostors, policy, limits);
        let trial_counts = run_trials::<5, _>(key, trials, |_, rng| {
            let sent = sample_uniform(p, rng);
            let y = ch.transmit(&sent, rng);
            let own = !threshold.exceeds(d.scaled_total(&sent, &y));
            let q = match TypeVector::of_sequence(&y, d.output_size()) {
                Ok(q) => q,
                Err(_) => return [0, 0, 0, 0, 1],
            };
            let Ok((p0, p1)) = laws.zero_one(&q) else {
                return [0, 0, 0, 0, 1];
            };
            let v: f64 = rng.random();
            let typical = if v < p0 {
                0
            } else if v < p0 + p1 {
                1
            } else {
                2
            };
            let mut out = [0; 5];
            out[DecodeOutcome::from_counts(own, typical).slot()] = 1;
            out
        });
        if trial_counts[4] > 0 {
            // Surface the first underlying error.
            laws.first_error()?;
            return Err(Error::InvalidArgument(
                "failed to evaluate impostor law".into(),
            ));
        }
        [
            trial_counts[0],
            trial_counts[1],
            trial_counts[2],
            trial_counts[3],
        ]
    };

    Ok(PackingResult {
        blocklength: p.n(),
        rate,
        codebook_size: size,
        trials,
        correct: counts[DecodeOutcome::Correct.slot()],
        wrong_unique: counts[DecodeOutcome::WrongUnique.slot()],
        none_typical: counts[DecodeOutcome::NoneTypical.slot()],
        ambiguous: counts[DecodeOutcome::Ambiguous.slot()],
        explicit,
    })
}

/// Per-output-type probabilities that zero or exactly one of `count`
/// independent impostors is typical with the received word.
/// `(P0, P1)` for one output type, or the error met computing it.
type LawEntry = std::result::Result<(f64, f64), String>;

struct ImpostorLaws<'a> {
    p: &'a TypeVector,
    level: Rational,
    d: &'a dyn DistortionFn,
    count: f64,
    policy: ArithPolicy,
    limits: &'a Limits,
    cache: Mutex<HashMap<TypeVector, LawEntry>>,
}

impl<'a> ImpostorLaws<'a> {
    fn new(
        p: &'a TypeVector,
        level: Rational,
        d: &'a dyn DistortionFn,
        count: u128,
        policy: ArithPolicy,
        limits: &'a Limits,
    ) -> Self {
        Self {
            p,
            level,
            d,
            count: count as f64,
            policy,
            limits,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn zero_one(&self, q: &TypeVector) -> std::result::Result<(f64, f64), String> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(q) {
            return hit.clone();
        }
        // Computed outside the lock; a duplicate computation is harmless
        // because the value is a pure function of q.
        let value = excess_tails(self.p, q, self.level, self.d, self.policy, self.limits)
            .map(|t| zero_one_probs(&t, self.count))
            .map_err(|e| e.to_string());
        self.cache
            .lock()
            .expect("cache lock")
            .insert(q.clone(), value.clone());
        value
    }

    fn first_error(&self) -> Result<()> {
        let cache = self.cache.lock().expect("cache lock");
        let mut errors: Vec<_> = cache
            .iter()
            .filter_map(|(q, v)| v.as_ref().err().map(|e| (q.clone(), e.clone())))
            .collect();
        errors.sort();
        match errors.first() {
            Some((q, e)) => Err(Error::InvalidArgument(format!("output type {q}: {e}"))),
            None => Ok(()),
        }
    }
}

/// `(Pr[no hits], Pr[exactly one hit])` among `count` independent trials
/// that each hit with probability `within`.
fn zero_one_probs(tails: &Tails, count: f64) -> (f64, f64) {
    let ln_excess = tails.excess.to_log().ln();
    let ln_within = tails.within.to_log().ln();
    if count == 0.0 {
        return (1.0, 0.0);
    }
    let p0 = if ln_excess == f64::NEG_INFINITY {
        0.0
    } else {
        (count * ln_excess).exp()
    };
    let p1 = if ln_within == f64::NEG_INFINITY || (ln_excess == f64::NEG_INFINITY && count > 1.0) {
        0.0
    } else if count == 1.0 {
        ln_within.exp()
    } else {
        (count.ln() + ln_within + (count - 1.0) * ln_excess).exp()
    };
    (p0, p1)
}

/// `-omega + A^(codebook_size - 1)`.
pub fn packing_bound(a: &Prob, omega: f64, codebook_size: u128) -> f64 {
    let power = if codebook_size <= 1 {
        1.0
    } else {
        a.to_log().powf((codebook_size - 1) as f64).to_f64()
    };
    power - omega
}

/// Verification of the correct-decoding lower bound for one run.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundCheck {
    pub empirical: f64,
    /// Bound with the point estimate of omega.
    pub bound: f64,
    /// Bound with the upper Wilson edge of omega.
    pub conservative_bound: f64,
    /// `BOUND_SLACK_WIDTHS` Wilson half-widths of the empirical rate.
    pub slack: f64,
    /// `empirical - bound`.
    pub margin: f64,
    pub pass: bool,
}

/// Checks `empirical >= -omega_upper + A^(M-1) - slack`.
pub fn bound_check(result: &PackingResult, a: &Prob, omega: &DistortionProfile) -> BoundCheck {
    let estimate = result.correct_estimate();
    let empirical = estimate.point();
    let bound = packing_bound(a, omega.point(), result.codebook_size);
    let conservative_bound = packing_bound(a, omega.upper(), result.codebook_size);
    let slack = BOUND_SLACK_WIDTHS * estimate.half_width();
    BoundCheck {
        empirical,
        bound,
        conservative_bound,
        slack,
        margin: empirical - bound,
        pass: empirical >= conservative_bound - slack,
    }
}

/// Channel-side `A`: `min_q Pr(d(U, y_q)/n > D)` over one fixed output word
/// `y_q` per type, computed with `U` random and `y_q` fixed. Agrees exactly
/// with the covering-side value from [`best_q`].
pub fn channel_side_a(
    p: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    limits: &Limits,
) -> Result<(TypeVector, ExactProb)> {
    let qs = enumerate_types(d.output_size(), p.n(), limits.enumeration_budget)?;
    let mut best: Option<(TypeVector, ExactProb)> = None;
    for q in qs {
        let y = q.canonical_sequence();
        let value = excess_prob_fixed_y(p, &y, level, d, limits)?;
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((q, value));
        }
    }
    Ok(best.expect("at least one output type"))
}

/// Largest rate on a 0.01-bit grid (up to `log2 |X|`) at which the
/// finite-length bound `A^(2^(nR) - 1)` with zero channel excess still
/// reaches 0.99. The codebook count is taken as the real number `2^(nR)` so
/// that the surrogate moves continuously with `R`.
pub fn achievable_rate_estimate(
    p: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    policy: ArithPolicy,
    limits: &Limits,
) -> Result<f64> {
    let a = best_q(p, level, d, policy, limits)?.tails.excess.to_log();
    let n = p.n() as f64;
    let steps = ((p.alphabet_size() as f64).log2() / RATE_STEP).round() as u64;
    let target = RATE_BOUND_TARGET.log2();
    let mut best = 0.0;
    for i in 0..=steps {
        let rate = i as f64 * RATE_STEP;
        let competitors = (n * rate * std::f64::consts::LN_2).exp_m1();
        let log2_bound = if competitors == 0.0 {
            0.0
        } else if a.is_zero() {
            f64::NEG_INFINITY
        } else {
            competitors * a.log2()
        };
        if log2_bound >= target {
            best = rate;
        } else {
            break;
        }
    }
    Ok(best)
}

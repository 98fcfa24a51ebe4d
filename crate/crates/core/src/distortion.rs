//! Distortion functions and excess-distortion probabilities between
//! uniform-on-type random sequences and fixed sequences.
//!
//! Distortion totals are carried as integers: every [`DistortionFn`] reports
//! a common denominator (`scale`) and totals multiplied by it. Thresholds are
//! per-letter rationals `D`; a pair is in *excess* when
//! `total / n > D`, i.e. `scaled_total > floor(n * scale * D)`. Ties at
//! exactly `D` are not excess.
//!
//! Exact probabilities come from one of two independent routes: direct
//! enumeration of a type class (any permutation-invariant distortion) or a
//! sum over joint types (additive distortion only).

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{log_sum_exp, ratio, ArithPolicy, ExactProb, LogProb, Prob, Tails};
use crate::rng::{run_trials, StreamKey};
use crate::stats::Estimate;
use crate::types::{
    format_rational, ln_multinomial, multinomial, parse_rational, sample_uniform,
    visit_joint_types, TypeVector,
};
use crate::{Limits, Rational};

/// A permutation-invariant block distortion.
///
/// Implementations must satisfy `scaled_total(πx, πy) == scaled_total(x, y)`
/// for every permutation `π`.
pub trait DistortionFn: Send + Sync {
    fn name(&self) -> String;

    fn input_size(&self) -> usize;

    fn output_size(&self) -> usize;

    /// Common denominator of every total this function can produce.
    fn scale(&self) -> u64;

    /// Total distortion of an aligned pair times [`scale`](Self::scale).
    /// Callers guarantee equal lengths and in-range symbols.
    fn scaled_total(&self, x: &[usize], y: &[usize]) -> u64;

    /// Largest per-letter distortion any pair can reach.
    fn max_per_letter(&self) -> Rational;

    fn total(&self, x: &[usize], y: &[usize]) -> Rational {
        Rational::new(self.scaled_total(x, y) as i64, self.scale() as i64)
    }

    fn evaluate(&self, x: &[usize], y: &[usize]) -> f64 {
        self.scaled_total(x, y) as f64 / self.scale() as f64
    }

    fn as_additive(&self) -> Option<&DistortionMatrix> {
        None
    }

    fn is_additive(&self) -> bool {
        self.as_additive().is_some()
    }
}

/// Per-letter distortion matrix; the block distortion is the sum over letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistortionMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
    scaled: Vec<u64>,
    scale: u64,
}

impl DistortionMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::InvalidDistortion(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(e) = entries.iter().find(|e| **e < Rational::zero()) {
            return Err(Error::InvalidDistortion(format!("negative entry {e}")));
        }
        let scale = entries
            .iter()
            .fold(1i64, |acc, e| num_integer::lcm(acc, *e.denom()));
        let scaled = entries
            .iter()
            .map(|e| (e * Rational::from_integer(scale)).to_integer() as u64)
            .collect();
        Ok(Self {
            rows,
            cols,
            entries,
            scaled,
            scale: scale as u64,
        })
    }

    /// `d(x, y) = [x != y]`.
    pub fn hamming(rows: usize, cols: usize) -> Self {
        let entries = (0..rows * cols)
            .map(|i| Rational::from_integer(i64::from(i / cols != i % cols)))
            .collect();
        Self::new(rows, cols, entries).expect("hamming matrix is valid")
    }

    pub fn constant(rows: usize, cols: usize, value: Rational) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    /// Parses a row-major grid of `"num/den"` strings.
    pub fn parse(grid: &[Vec<String>]) -> Result<Self> {
        let rows = grid.len();
        let cols = grid.first().map_or(0, Vec::len);
        if grid.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistortion("ragged distortion matrix".into()));
        }
        let entries = grid
            .iter()
            .flatten()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn letter(&self, x: usize, y: usize) -> Rational {
        self.entries[x * self.cols + y]
    }

    pub fn scaled_letter(&self, x: usize, y: usize) -> u64 {
        self.scaled[x * self.cols + y]
    }

    /// Scaled total of every pair with the given row-major joint type counts.
    pub fn joint_scaled_total(&self, cells: &[usize]) -> u64 {
        cells
            .iter()
            .zip(&self.scaled)
            .map(|(&c, &d)| c as u64 * d)
            .sum()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|x| {
                (0..self.cols)
                    .map(|y| {
                        let e = self.letter(x, y);
                        *e.numer() as f64 / *e.denom() as f64
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|x| {
                (0..self.cols)
                    .map(|y| format_rational(&self.letter(x, y)))
                    .collect()
            })
            .collect()
    }
}

impl DistortionFn for DistortionMatrix {
    fn name(&self) -> String {
        format!("additive{:?}", self.to_strings())
    }

    fn input_size(&self) -> usize {
        self.rows
    }

    fn output_size(&self) -> usize {
        self.cols
    }

    fn scale(&self) -> u64 {
        self.scale
    }

    fn scaled_total(&self, x: &[usize], y: &[usize]) -> u64 {
        debug_assert_eq!(x.len(), y.len());
        x.iter()
            .zip(y)
            .map(|(&a, &b)| self.scaled[a * self.cols + b])
            .sum()
    }

    fn max_per_letter(&self) -> Rational {
        self.entries.iter().copied().max().unwrap_or_default()
    }

    fn as_additive(&self) -> Option<&DistortionMatrix> {
        Some(self)
    }
}

/// `n * max_i d(x_i, y_i)`: permutation invariant but not additive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeakDistortion(pub DistortionMatrix);

impl DistortionFn for PeakDistortion {
    fn name(&self) -> String {
        format!("peak{:?}", self.0.to_strings())
    }

    fn input_size(&self) -> usize {
        self.0.rows
    }

    fn output_size(&self) -> usize {
        self.0.cols
    }

    fn scale(&self) -> u64 {
        self.0.scale
    }

    fn scaled_total(&self, x: &[usize], y: &[usize]) -> u64 {
        let peak = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| self.0.scaled_letter(a, b))
            .max()
            .unwrap_or(0);
        peak * x.len() as u64
    }

    fn max_per_letter(&self) -> Rational {
        self.0.max_per_letter()
    }
}

/// Integer cutoff equivalent to the rational test `total / n > D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Threshold {
    cutoff: u64,
}

impl Threshold {
    pub fn new(n: usize, level: Rational, scale: u64) -> Result<Self> {
        if level < Rational::zero() {
            return Err(Error::InvalidArgument(format!(
                "negative distortion level {level}"
            )));
        }
        // scaled_total is an integer, so `t > n*scale*D` iff `t > floor(n*scale*D)`.
        let num = n as i128 * scale as i128 * *level.numer() as i128;
        let cutoff = num / *level.denom() as i128;
        Ok(Self {
            cutoff: u64::try_from(cutoff).unwrap_or(u64::MAX),
        })
    }

    pub fn for_fn(d: &dyn DistortionFn, n: usize, level: Rational) -> Result<Self> {
        Self::new(n, level, d.scale())
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn exceeds(&self, scaled_total: u64) -> bool {
        scaled_total > self.cutoff
    }
}

fn check_sequence(seq: &[usize], n: usize, alphabet: usize) -> Result<()> {
    if seq.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: seq.len(),
        });
    }
    if let Some(s) = seq.iter().find(|&&s| s >= alphabet) {
        return Err(Error::InvalidArgument(format!(
            "symbol {s} outside alphabet of size {alphabet}"
        )));
    }
    Ok(())
}

fn check_sizes(d: &dyn DistortionFn, p: &TypeVector, q: &TypeVector) -> Result<()> {
    if p.alphabet_size() != d.input_size() || q.alphabet_size() != d.output_size() {
        return Err(Error::InvalidArgument(format!(
            "types over {}x{} symbols do not match a {}x{} distortion",
            p.alphabet_size(),
            q.alphabet_size(),
            d.input_size(),
            d.output_size()
        )));
    }
    if p.n() != q.n() {
        return Err(Error::LengthMismatch {
            expected: p.n(),
            found: q.n(),
        });
    }
    Ok(())
}

fn within_budget(count: &BigUint, limits: &Limits) -> bool {
    *count <= BigUint::from(limits.enumeration_budget)
}

fn budget_error(what: &'static str, count: &BigUint, limits: &Limits) -> Error {
    Error::BudgetExceeded {
        what,
        count: count.to_string(),
        budget: limits.enumeration_budget,
    }
}

/// Histogram of `scaled_total(seq, fixed)` (or `(fixed, seq)` when
/// `fixed_is_input`) over every `seq` in the type class of `t`.
fn class_histogram(
    t: &TypeVector,
    fixed: &[usize],
    fixed_is_input: bool,
    d: &dyn DistortionFn,
) -> BTreeMap<u64, u64> {
    let total = |seq: &[usize]| {
        if fixed_is_input {
            d.scaled_total(fixed, seq)
        } else {
            d.scaled_total(seq, fixed)
        }
    };
    let peak = d.max_per_letter();
    let max = (*peak.numer() as i128 * d.scale() as i128 / *peak.denom() as i128)
        .saturating_mul(t.n() as i128);
    if (0..DENSE_HISTOGRAM_LIMIT).contains(&max) {
        let mut dense = vec![0u64; max as usize + 1];
        crate::types::for_each_member(t, |seq| dense[total(seq) as usize] += 1);
        return dense
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(k, c)| (k as u64, c))
            .collect();
    }
    let mut hist = BTreeMap::new();
    crate::types::for_each_member(t, |seq| *hist.entry(total(seq)).or_insert(0u64) += 1);
    hist
}

/// Largest scaled total for which [`class_histogram`] uses a flat array.
const DENSE_HISTOGRAM_LIMIT: i128 = 1 << 20;

fn count_above(hist: &BTreeMap<u64, u64>, cutoff: u64) -> BigUint {
    hist.range(cutoff.saturating_add(1)..)
        .map(|(_, &c)| BigUint::from(c))
        .sum()
}

/// For each cutoff, the number of sequences in the class of `free` whose
/// distortion against `fixed` exceeds it. Enumerates the class when it fits
/// the budget, otherwise sums over joint types (additive only).
fn excess_counts_against_fixed(
    free: &TypeVector,
    fixed: &[usize],
    fixed_is_input: bool,
    d: &dyn DistortionFn,
    cutoffs: &[u64],
    limits: &Limits,
) -> Result<Vec<BigUint>> {
    let size = free.class_size();
    if within_budget(&size, limits) {
        let hist = class_histogram(free, fixed, fixed_is_input, d);
        return Ok(cutoffs.iter().map(|&c| count_above(&hist, c)).collect());
    }
    let matrix = d
        .as_additive()
        .ok_or_else(|| budget_error("type class", &size, limits))?;
    let (rows, cols) = (matrix.rows(), matrix.cols());
    let fixed_type = if fixed_is_input {
        TypeVector::of_sequence(fixed, rows)?
    } else {
        TypeVector::of_sequence(fixed, cols)?
    };
    let (row, col) = if fixed_is_input {
        (&fixed_type, free)
    } else {
        (free, &fixed_type)
    };
    let mut counts = vec![BigUint::zero(); cutoffs.len()];
    let mut visited = 0u64;
    visit_joint_types(row, col, |cells| {
        visited += 1;
        if visited > limits.enumeration_budget {
            return Err(budget_error(
                "joint type set",
                &BigUint::from(visited),
                limits,
            ));
        }
        let total = matrix.joint_scaled_total(cells);
        // Members of the free class sharing this joint type with `fixed`:
        // arrange each fixed symbol's block independently.
        let mult = if fixed_is_input {
            (0..rows)
                .map(|x| multinomial(&cells[x * cols..(x + 1) * cols]))
                .product::<BigUint>()
        } else {
            (0..cols)
                .map(|y| {
                    let column: Vec<usize> = (0..rows).map(|x| cells[x * cols + y]).collect();
                    multinomial(&column)
                })
                .product::<BigUint>()
        };
        for (slot, &c) in counts.iter_mut().zip(cutoffs) {
            if total > c {
                *slot += &mult;
            }
        }
        Ok(())
    })?;
    Ok(counts)
}

/// `|{u in T_p : d(u, y)/n > D}|` for each level in `levels`.
pub fn ball_cardinalities(
    y: &[usize],
    p: &TypeVector,
    levels: &[Rational],
    d: &dyn DistortionFn,
    limits: &Limits,
) -> Result<Vec<BigUint>> {
    check_sequence(y, p.n(), d.output_size())?;
    if p.alphabet_size() != d.input_size() {
        return Err(Error::InvalidArgument(
            "source type does not match distortion".into(),
        ));
    }
    let cutoffs = cutoffs(d, p.n(), levels)?;
    excess_counts_against_fixed(p, y, false, d, &cutoffs, limits)
}

/// Number of members of `T_p` whose normalized distortion to `y` exceeds `D`.
pub fn ball_cardinality(
    y: &[usize],
    p: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    limits: &Limits,
) -> Result<BigUint> {
    Ok(ball_cardinalities(y, p, &[level], d, limits)?.remove(0))
}

/// `Pr(d(U, y)/n > D)` with `U` uniform on the type class of `p`.
pub fn excess_prob_fixed_y(
    p: &TypeVector,
    y: &[usize],
    level: Rational,
    d: &dyn DistortionFn,
    limits: &Limits,
) -> Result<ExactProb> {
    let count = ball_cardinality(y, p, level, d, limits)?;
    ratio(&count, &p.class_size())
}

/// `Pr(d(u, V)/n > D)` with `V` uniform on the type class of `q`.
pub fn excess_prob_fixed_u(
    u: &[usize],
    q: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    limits: &Limits,
) -> Result<ExactProb> {
    Ok(excess_probs_fixed_u(u, q, &[level], d, limits)?.remove(0))
}

/// [`excess_prob_fixed_y`] for several levels from one pass over `T_p`.
pub fn excess_probs_fixed_y(
    p: &TypeVector,
    y: &[usize],
    levels: &[Rational],
    d: &dyn DistortionFn,
    limits: &Limits,
) -> Result<Vec<ExactProb>> {
    let size = p.class_size();
    ball_cardinalities(y, p, levels, d, limits)?
        .iter()
        .map(|c| ratio(c, &size))
        .collect()
}

/// [`excess_prob_fixed_u`] for several levels from one pass over `T_q`.
pub fn excess_probs_fixed_u(
    u: &[usize],
    q: &TypeVector,
    levels: &[Rational],
    d: &dyn DistortionFn,
    limits: &Limits,
) -> Result<Vec<ExactProb>> {
    check_sequence(u, q.n(), d.input_size())?;
    if q.alphabet_size() != d.output_size() {
        return Err(Error::InvalidArgument(
            "output type does not match distortion".into(),
        ));
    }
    let cutoffs = cutoffs(d, q.n(), levels)?;
    let size = q.class_size();
    excess_counts_against_fixed(q, u, true, d, &cutoffs, limits)?
        .iter()
        .map(|c| ratio(c, &size))
        .collect()
}

fn cutoffs(d: &dyn DistortionFn, n: usize, levels: &[Rational]) -> Result<Vec<u64>> {
    levels
        .iter()
        .map(|&l| Threshold::for_fn(d, n, l).map(|t| t.cutoff()))
        .collect()
}

/// `Pr(d(U, V)/n > D)` with `U`, `V` independent and uniform on the type
/// classes of `p` and `q`, exactly.
///
/// Additive distortions sum pair counts over joint types; other distortions
/// fall back to enumerating both classes when `|T_p| * |T_q|` fits the budget.
pub fn excess_prob_both_random(
    p: &TypeVector,
    q: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    limits: &Limits,
) -> Result<ExactProb> {
    Ok(excess_probs_both_random(p, q, &[level], d, limits)?.remove(0))
}

/// [`excess_prob_both_random`] for several levels in one pass.
pub fn excess_probs_both_random(
    p: &TypeVector,
    q: &TypeVector,
    levels: &[Rational],
    d: &dyn DistortionFn,
    limits: &Limits,
) -> Result<Vec<ExactProb>> {
    check_sizes(d, p, q)?;
    let cutoffs = cutoffs(d, p.n(), levels)?;
    let total = p.class_size() * q.class_size();
    let mut favourable = vec![BigUint::zero(); cutoffs.len()];
    match d.as_additive() {
        Some(matrix) => {
            let mut visited = 0u64;
            visit_joint_types(p, q, |cells| {
                visited += 1;
                if visited > limits.enumeration_budget {
                    return Err(budget_error(
                        "joint type set",
                        &BigUint::from(visited),
                        limits,
                    ));
                }
                let scaled = matrix.joint_scaled_total(cells);
                if cutoffs.iter().any(|&c| scaled > c) {
                    let pairs = multinomial(cells);
                    for (slot, &c) in favourable.iter_mut().zip(&cutoffs) {
                        if scaled > c {
                            *slot += &pairs;
                        }
                    }
                }
                Ok(())
            })?;
        }
        None => {
            if !within_budget(&total, limits) {
                return Err(budget_error("pair set", &total, limits));
            }
            let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
            crate::types::for_each_member(p, |u| {
                crate::types::for_each_member(q, |v| {
                    *hist.entry(d.scaled_total(u, v)).or_insert(0) += 1;
                });
            });
            for (slot, &c) in favourable.iter_mut().zip(&cutoffs) {
                *slot = count_above(&hist, c);
            }
        }
    }
    favourable.iter().map(|f| ratio(f, &total)).collect()
}

/// Both tails of `d(U, V)/n` against `D` in the log domain, via joint types.
pub fn excess_tails_log(
    p: &TypeVector,
    q: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    limits: &Limits,
) -> Result<Tails> {
    check_sizes(d, p, q)?;
    let matrix = d.as_additive().ok_or(Error::NotAdditive)?;
    let threshold = Threshold::for_fn(d, p.n(), level)?;
    let mut excess = Vec::new();
    let mut within = Vec::new();
    visit_joint_types(p, q, |cells| {
        if (excess.len() + within.len()) as u64 >= limits.enumeration_budget {
            return Err(Error::BudgetExceeded {
                what: "joint type set",
                count: format!("more than {}", limits.enumeration_budget),
                budget: limits.enumeration_budget,
            });
        }
        let ln_pairs = ln_multinomial(cells);
        if threshold.exceeds(matrix.joint_scaled_total(cells)) {
            excess.push(ln_pairs);
        } else {
            within.push(ln_pairs);
        }
        Ok(())
    })?;
    let ln_total = p.ln_class_size() + q.ln_class_size();
    let to_prob = |terms: &[f64]| LogProb::from_ln(log_sum_exp(terms) - ln_total);
    Ok(Tails {
        excess: Prob::Log(to_prob(&excess)?),
        within: Prob::Log(to_prob(&within)?),
    })
}

/// Exact tails under the arithmetic policy: exact for `Exact`, log for
/// `Log`, and for `Auto` exact up to `limits.exact_max_blocklength` and log
/// beyond it.
pub fn excess_tails(
    p: &TypeVector,
    q: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    policy: ArithPolicy,
    limits: &Limits,
) -> Result<Tails> {
    let exact = match policy {
        ArithPolicy::Exact => true,
        ArithPolicy::Log => false,
        ArithPolicy::Auto => p.n() <= limits.exact_max_blocklength || !d.is_additive(),
    };
    if exact {
        excess_prob_both_random(p, q, level, d, limits).map(Tails::exact)
    } else {
        excess_tails_log(p, q, level, d, limits)
    }
}

/// Smallest and largest scaled totals over all pairs drawn from `T_p x T_q`.
pub fn scaled_total_range(
    p: &TypeVector,
    q: &TypeVector,
    d: &DistortionMatrix,
) -> Result<(u64, u64)> {
    let mut lo = u64::MAX;
    let mut hi = 0;
    visit_joint_types(p, q, |cells| {
        let t = d.joint_scaled_total(cells);
        lo = lo.min(t);
        hi = hi.max(t);
        Ok(())
    })?;
    Ok((lo, hi))
}

/// Outcome of checking the duality identity on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub blocklength: usize,
    pub p: TypeVector,
    pub q: TypeVector,
    #[serde(serialize_with = "ser_rational")]
    pub level: Rational,
    /// `Pr(d(U, y)/n > D)` for each probe `y` of type `q`.
    #[serde(serialize_with = "ser_probs")]
    pub lhs: Vec<ExactProb>,
    /// `Pr(d(u, V_q)/n > D)` for each probe `u` of type `p`.
    #[serde(serialize_with = "ser_probs")]
    pub rhs: Vec<ExactProb>,
    #[serde(serialize_with = "ser_prob")]
    pub both_random: ExactProb,
    pub equal: bool,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn ser_prob<S: serde::Serializer>(p: &ExactProb, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_ratio_string())
}

fn ser_probs<S: serde::Serializer>(p: &[ExactProb], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.iter().map(ExactProb::to_ratio_string))
}

impl DualityReport {
    /// The common value when the identity holds.
    pub fn common_value(&self) -> Option<&ExactProb> {
        self.equal.then_some(&self.both_random)
    }
}

/// Evaluates both sides of the duality identity on `probes` random fixed
/// sequences each, plus the both-random value, and records whether all of
/// them coincide exactly.
pub fn check_duality(
    p: &TypeVector,
    q: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    probes: usize,
    key: &StreamKey,
    limits: &Limits,
) -> Result<DualityReport> {
    Ok(check_duality_levels(p, q, &[level], d, probes, key, limits)?.remove(0))
}

/// [`check_duality`] at several levels, reusing the same probe sequences.
pub fn check_duality_levels(
    p: &TypeVector,
    q: &TypeVector,
    levels: &[Rational],
    d: &dyn DistortionFn,
    probes: usize,
    key: &StreamKey,
    limits: &Limits,
) -> Result<Vec<DualityReport>> {
    check_sizes(d, p, q)?;
    let mut lhs = Vec::with_capacity(probes);
    let mut rhs = Vec::with_capacity(probes);
    for i in 0..probes as u64 {
        let y = sample_uniform(q, &mut key.child("duality-y", &[]).stream(i));
        lhs.push(excess_probs_fixed_y(p, &y, levels, d, limits)?);
        let u = sample_uniform(p, &mut key.child("duality-u", &[]).stream(i));
        rhs.push(excess_probs_fixed_u(&u, q, levels, d, limits)?);
    }
    let both = excess_probs_both_random(p, q, levels, d, limits)?;
    Ok(levels
        .iter()
        .zip(both)
        .enumerate()
        .map(|(k, (&level, both_random))| {
            let lhs: Vec<ExactProb> = lhs.iter().map(|v| v[k].clone()).collect();
            let rhs: Vec<ExactProb> = rhs.iter().map(|v| v[k].clone()).collect();
            let equal = lhs.iter().chain(&rhs).all(|v| *v == both_random);
            DualityReport {
                blocklength: p.n(),
                p: p.clone(),
                q: q.clone(),
                level,
                lhs,
                rhs,
                both_random,
                equal,
            }
        })
        .collect())
}

/// Monte Carlo frequency of `d(U, V)/n > D` over independent uniform draws.
pub fn excess_prob_mc(
    p: &TypeVector,
    q: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    trials: u64,
    key: &StreamKey,
) -> Result<Estimate> {
    check_sizes(d, p, q)?;
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    let threshold = Threshold::for_fn(d, p.n(), level)?;
    let [hits] = run_trials(key, trials, |_, rng| {
        let u = sample_uniform(p, rng);
        let v = sample_uniform(q, rng);
        [u64::from(threshold.exceeds(d.scaled_total(&u, &v)))]
    });
    Ok(Estimate::new(hits, trials))
}

/// `count / class size` as `f64`, for diagnostics.
pub fn ratio_f64(count: &BigUint, total: &BigUint) -> f64 {
    match (count.to_f64(), total.to_f64()) {
        (Some(c), Some(t)) if t.is_finite() => c / t,
        _ => f64::NAN,
    }
}

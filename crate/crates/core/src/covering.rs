//! Source coding by random covering.
//!
//! A codebook of `2^floor(n R)` words is drawn independently and uniformly
//! from the type class of an output type `q`; a source word `u` is encoded to
//! the first codeword within normalized distortion `D`, or fails. The
//! failure probability for every `u` is `Pr(d(U, V_q)/n > D)^(codebook
//! size)`, and the best output type gives `A = min_q Pr(d(U, V_q)/n > D)`.

use rand::Rng;
use serde::Serialize;

use crate::distortion::{excess_tails, DistortionFn, Threshold};
use crate::error::{Error, Result};
use crate::prob::{ArithPolicy, Prob, Tails};
use crate::rng::{run_trials, StreamKey};
use crate::stats::Estimate;
use crate::types::{enumerate_types, sample_uniform, TypeVector};
use crate::{codebook_size, Limits, Rational};

/// Which output type(s) the codebook is drawn from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputTypeChoice {
    Fixed(TypeVector),
    /// The minimizer returned by [`best_q`].
    Best,
    /// Every output type at the block length, one cell each.
    Sweep,
}

#[derive(Clone, Debug)]
pub struct CoveringConfig {
    pub p: TypeVector,
    pub q: OutputTypeChoice,
    pub level: Rational,
    /// Bits per letter; the codebook holds `2^floor(n * rate)` words.
    pub rate: f64,
    pub trials: u64,
}

/// Simulation and analytic value for one output type.
#[derive(Clone, Debug)]
pub struct CoveringCell {
    pub q: TypeVector,
    pub codebook_size: u128,
    /// Fraction of trials where no codeword covered the source word.
    pub empirical: Estimate,
    /// `Pr(d(U, V_q)/n > D)^(codebook size)`.
    pub analytic: Prob,
    /// Whether codebooks were drawn word by word (`false`: hit-count law).
    pub explicit: bool,
}

#[derive(Clone, Debug)]
pub struct CoveringResult {
    pub cells: Vec<CoveringCell>,
    /// Index into `cells` of the headline output type.
    pub chosen: usize,
}

impl CoveringResult {
    pub fn chosen(&self) -> &CoveringCell {
        &self.cells[self.chosen]
    }
}

/// Index of the first codeword within the distortion threshold of `u`.
pub fn encode(
    u: &[usize],
    codebook: &[Vec<usize>],
    threshold: Threshold,
    d: &dyn DistortionFn,
) -> Option<usize> {
    codebook
        .iter()
        .position(|c| !threshold.exceeds(d.scaled_total(u, c)))
}

/// `Pr(d(U, V_q)/n > D)^codebook_size`.
pub fn analytic_failure(
    p: &TypeVector,
    q: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    codebook_size: u128,
    policy: ArithPolicy,
    limits: &Limits,
) -> Result<Prob> {
    let tails = excess_tails(p, q, level, d, policy, limits)?;
    Ok(tails.excess_power(codebook_size, limits.exact_power_limit))
}

/// Runs the covering experiment.
pub fn simulate_covering(
    cfg: &CoveringConfig,
    d: &dyn DistortionFn,
    key: &StreamKey,
    policy: ArithPolicy,
    limits: &Limits,
) -> Result<CoveringResult> {
    let n = cfg.p.n();
    let size = codebook_size(n, cfg.rate)?;
    let (qs, chosen) = match &cfg.q {
        OutputTypeChoice::Fixed(q) => (vec![q.clone()], 0),
        OutputTypeChoice::Best => (vec![best_q(&cfg.p, cfg.level, d, policy, limits)?.q], 0),
        OutputTypeChoice::Sweep => {
            let best = best_q(&cfg.p, cfg.level, d, policy, limits)?;
            let qs = enumerate_types(d.output_size(), n, limits.enumeration_budget)?;
            let chosen = qs.iter().position(|q| *q == best.q).unwrap_or(0);
            (qs, chosen)
        }
    };
    let cells = qs
        .into_iter()
        .enumerate()
        .map(|(i, q)| {
            simulate_cell(
                cfg,
                q,
                size,
                d,
                &key.child("cover-q", &[i as u64]),
                policy,
                limits,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoveringResult { cells, chosen })
}

fn simulate_cell(
    cfg: &CoveringConfig,
    q: TypeVector,
    size: u128,
    d: &dyn DistortionFn,
    key: &StreamKey,
    policy: ArithPolicy,
    limits: &Limits,
) -> Result<CoveringCell> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    let p = &cfg.p;
    let tails = excess_tails(p, &q, cfg.level, d, policy, limits)?;
    let analytic = tails.excess_power(size, limits.exact_power_limit);
    let threshold = Threshold::for_fn(d, p.n(), cfg.level)?;
    let explicit = size <= limits.explicit_codebook_limit;
    let [failures] = if explicit {
        run_trials(key, cfg.trials, |_, rng| {
            let u = sample_uniform(p, rng);
            let codebook: Vec<Vec<usize>> = (0..size).map(|_| sample_uniform(&q, rng)).collect();
            [u64::from(encode(&u, &codebook, threshold, d).is_none())]
        })
    } else {
        // Codewords are independent of each other and of u, and each covers
        // u with the same probability, so failure is one Bernoulli draw.
        let p_fail = analytic.to_f64();
        run_trials(key, cfg.trials, |_, rng| {
            [u64::from(rng.random::<f64>() < p_fail)]
        })
    };
    Ok(CoveringCell {
        q,
        codebook_size: size,
        empirical: Estimate::new(failures, cfg.trials),
        analytic,
        explicit,
    })
}

/// Minimizing output type and its tails.
#[derive(Clone, Debug)]
pub struct BestQ {
    pub q: TypeVector,
    pub tails: Tails,
}

impl BestQ {
    /// `A = min_q Pr(d(U, V_q)/n > D)`.
    pub fn a(&self) -> &Prob {
        &self.tails.excess
    }
}

/// Excess tails for every output type at the block length of `p`, in
/// lexicographic order of `q`.
pub fn sweep_q(
    p: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    policy: ArithPolicy,
    limits: &Limits,
) -> Result<Vec<(TypeVector, Tails)>> {
    let qs = enumerate_types(d.output_size(), p.n(), limits.enumeration_budget)?;
    let eval = |q: TypeVector| excess_tails(p, &q, level, d, policy, limits).map(|t| (q, t));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        qs.into_par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        qs.into_iter().map(eval).collect()
    }
}

/// The output type minimizing `Pr(d(U, V_q)/n > D)`; ties go to the
/// lexicographically first `q`.
pub fn best_q(
    p: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    policy: ArithPolicy,
    limits: &Limits,
) -> Result<BestQ> {
    let table = sweep_q(p, level, d, policy, limits)?;
    let mut best: Option<(TypeVector, Tails)> = None;
    for (q, tails) in table {
        let better = match &best {
            None => true,
            Some((_, b)) => strictly_more_likely(&tails.within, &b.within),
        };
        if better {
            best = Some((q, tails));
        }
    }
    let (q, tails) = best.expect("at least one output type");
    Ok(BestQ { q, tails })
}

/// Exact comparison for exact values; log-domain values must win by more
/// than rounding noise so that mirror-image types tie.
fn strictly_more_likely(a: &Prob, b: &Prob) -> bool {
    match (a, b) {
        (Prob::Exact(x), Prob::Exact(y)) => x > y,
        _ => {
            let (la, lb) = (a.log2(), b.log2());
            if lb == f64::NEG_INFINITY {
                return la > lb;
            }
            la > lb + 1e-12 * lb.abs().max(1.0)
        }
    }
}

/// `-(1/n) log2 max_q Pr(d(U, V_q)/n <= D)`, or infinite when no output
/// type can ever cover.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum RateExponent {
    Finite(f64),
    Infinite,
}

impl RateExponent {
    pub fn as_f64(self) -> f64 {
        match self {
            RateExponent::Finite(v) => v,
            RateExponent::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, RateExponent::Infinite)
    }
}

/// Everything the exponent table reports for one block length.
#[derive(Clone, Debug)]
pub struct ExponentReport {
    pub best: BestQ,
    /// `log2 beta`, where `beta = 1 / max_q Pr(d <= D)` approximates the
    /// number of codewords needed.
    pub log2_beta: f64,
    pub exponent: RateExponent,
}

pub fn exponent_report(
    p: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    policy: ArithPolicy,
    limits: &Limits,
) -> Result<ExponentReport> {
    let best = best_q(p, level, d, policy, limits)?;
    let log2_within = best.tails.within.log2();
    let exponent = if log2_within == f64::NEG_INFINITY {
        RateExponent::Infinite
    } else {
        // max(0.0) clears a -0.0 when the within-probability is exactly 1.
        RateExponent::Finite((-log2_within / p.n() as f64).max(0.0))
    };
    Ok(ExponentReport {
        best,
        log2_beta: -log2_within,
        exponent,
    })
}

/// `(1/n) log2 beta` for the uniform source of type `p`.
pub fn rate_exponent(
    p: &TypeVector,
    level: Rational,
    d: &dyn DistortionFn,
    policy: ArithPolicy,
    limits: &Limits,
) -> Result<RateExponent> {
    Ok(exponent_report(p, level, d, policy, limits)?.exponent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::DistortionMatrix;
    use crate::prob::ExactProb;

    fn tv(c: &[usize]) -> TypeVector {
        TypeVector::new(c.to_vec()).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn ep(n: u64, d: u64) -> ExactProb {
        ExactProb::from_counts(n.into(), d.into()).unwrap()
    }

    const L: Limits = Limits::DEFAULT;
    const EXACT: ArithPolicy = ArithPolicy::Exact;

    #[test]
    fn analytic_failure_examples() {
        let d = DistortionMatrix::hamming(2, 2);
        let f = analytic_failure(&tv(&[1, 1]), &tv(&[1, 1]), r(0, 1), &d, 3, EXACT, &L).unwrap();
        assert_eq!(f, Prob::Exact(ep(1, 8)));
        let zero = analytic_failure(&tv(&[1, 1]), &tv(&[1, 1]), r(1, 1), &d, 3, EXACT, &L).unwrap();
        assert!(zero.is_zero());
        let one = analytic_failure(&tv(&[1, 1]), &tv(&[2, 0]), r(0, 1), &d, 5, EXACT, &L).unwrap();
        assert_eq!(one, Prob::Exact(ExactProb::one()));
    }

    #[test]
    fn best_q_examples() {
        let d = DistortionMatrix::hamming(2, 2);
        let b = best_q(&tv(&[1, 1]), r(0, 1), &d, EXACT, &L).unwrap();
        assert_eq!(b.q, tv(&[1, 1]));
        assert_eq!(b.a(), &Prob::Exact(ep(1, 2)));

        let b = best_q(&tv(&[1, 1]), r(1, 1), &d, EXACT, &L).unwrap();
        assert_eq!(b.q, tv(&[0, 2]));
        assert!(b.a().is_zero());
    }

    #[test]
    fn best_q_brute_force_sweep() {
        // p = (2,2), D = 1/4 (at most one mismatch among four letters).
        // q = (0,4),(4,0): distance 2 always -> 1. q = (1,3),(3,1): distance
        // 1 w.p. 1/2 -> 1/2. q = (2,2): distance 0 w.p. 1/6, else >= 2 -> 5/6.
        let d = DistortionMatrix::hamming(2, 2);
        let table = sweep_q(&tv(&[2, 2]), r(1, 4), &d, EXACT, &L).unwrap();
        let excess: Vec<_> = table.iter().map(|(_, t)| t.excess.clone()).collect();
        let want = [ep(1, 1), ep(1, 2), ep(5, 6), ep(1, 2), ep(1, 1)];
        assert_eq!(excess, want.map(Prob::Exact));
        let b = best_q(&tv(&[2, 2]), r(1, 4), &d, EXACT, &L).unwrap();
        assert_eq!(b.q, tv(&[1, 3]));
    }

    #[test]
    fn rate_exponent_examples() {
        let d = DistortionMatrix::hamming(2, 2);
        let e = rate_exponent(&tv(&[1, 1]), r(0, 1), &d, EXACT, &L).unwrap();
        assert_eq!(e, RateExponent::Finite(0.5));
        let e = rate_exponent(&tv(&[3, 3]), r(1, 1), &d, EXACT, &L).unwrap();
        assert_eq!(e, RateExponent::Finite(0.0));
    }

    #[test]
    fn infinite_exponent_is_signalled() {
        // Every reproduction costs at least 1 per letter.
        let d = DistortionMatrix::new(2, 2, vec![r(1, 1), r(2, 1), r(2, 1), r(1, 1)]).unwrap();
        let e = rate_exponent(&tv(&[1, 1]), r(1, 2), &d, EXACT, &L).unwrap();
        assert!(e.is_infinite());
        assert_eq!(e.as_f64(), f64::INFINITY);
    }

    #[test]
    fn covering_trivial_and_small_cases() {
        let d = DistortionMatrix::hamming(2, 2);
        let key = StreamKey::new(11, "cover-test", &[]);
        let cfg = CoveringConfig {
            p: tv(&[2, 2]),
            q: OutputTypeChoice::Fixed(tv(&[1, 3])),
            level: r(1, 1),
            rate: 0.0,
            trials: 200,
        };
        let res = simulate_covering(&cfg, &d, &key, EXACT, &L).unwrap();
        assert_eq!(res.chosen().empirical.successes, 0);

        let cfg = CoveringConfig {
            p: tv(&[1, 1]),
            q: OutputTypeChoice::Fixed(tv(&[1, 1])),
            level: r(0, 1),
            rate: 0.0,
            trials: 10_000,
        };
        let res = simulate_covering(&cfg, &d, &key, EXACT, &L).unwrap();
        let cell = res.chosen();
        assert_eq!(cell.analytic, Prob::Exact(ep(1, 2)));
        assert!(cell.empirical.contains(0.5), "{:?}", cell.empirical);

        let cfg = CoveringConfig {
            p: tv(&[2, 2]),
            q: OutputTypeChoice::Fixed(tv(&[2, 2])),
            level: r(0, 1),
            rate: 0.5,
            trials: 10_000,
        };
        let res = simulate_covering(&cfg, &d, &key, EXACT, &L).unwrap();
        let cell = res.chosen();
        assert_eq!(cell.codebook_size, 4);
        assert_eq!(cell.analytic, Prob::Exact(ep(625, 1296)));
        assert!(
            cell.empirical.contains(625.0 / 1296.0),
            "{:?}",
            cell.empirical
        );
    }

    #[test]
    fn sweep_reports_every_output_type() {
        let d = DistortionMatrix::hamming(2, 2);
        let key = StreamKey::new(12, "sweep", &[]);
        let cfg = CoveringConfig {
            p: tv(&[2, 2]),
            q: OutputTypeChoice::Sweep,
            level: r(1, 4),
            rate: 0.25,
            trials: 100,
        };
        let res = simulate_covering(&cfg, &d, &key, EXACT, &L).unwrap();
        assert_eq!(res.cells.len(), 5);
        assert_eq!(res.chosen().q, tv(&[1, 3]));
    }

    #[test]
    fn explicit_and_hit_count_samplers_agree() {
        let d = DistortionMatrix::hamming(2, 2);
        let cfg = CoveringConfig {
            p: tv(&[3, 3]),
            q: OutputTypeChoice::Fixed(tv(&[3, 3])),
            level: r(1, 6),
            rate: 0.5,
            trials: 20_000,
        };
        let key = StreamKey::new(13, "samplers", &[]);
        let explicit = simulate_covering(&cfg, &d, &key, EXACT, &L).unwrap();
        let lazy_limits = Limits {
            explicit_codebook_limit: 1,
            ..L
        };
        let lazy = simulate_covering(&cfg, &d, &key, EXACT, &lazy_limits).unwrap();
        let (a, b) = (explicit.chosen(), lazy.chosen());
        assert!(a.explicit && !b.explicit);
        let truth = a.analytic.to_f64();
        assert!(a.empirical.contains(truth), "{:?} vs {truth}", a.empirical);
        assert!(b.empirical.contains(truth), "{:?} vs {truth}", b.empirical);
    }

    #[test]
    fn encode_picks_lowest_index() {
        let d = DistortionMatrix::hamming(2, 2);
        let t = Threshold::for_fn(&d, 2, r(1, 2)).unwrap();
        let book = vec![vec![1, 1], vec![0, 0], vec![0, 1]];
        assert_eq!(encode(&[0, 1], &book, t, &d), Some(0));
        let t0 = Threshold::for_fn(&d, 2, r(0, 1)).unwrap();
        assert_eq!(encode(&[0, 1], &book, t0, &d), Some(2));
        assert_eq!(encode(&[1, 0], &book, t0, &d), None);
    }
}

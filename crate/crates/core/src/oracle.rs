//! Rate-distortion references: Blahut-Arimoto for a general i.i.d. source
//! and the binary-Hamming closed form `1 - h(D)`.
//!
//! Floating point only. These values are compared against the finite-length
//! exponents and never feed the exact paths.

use serde::Serialize;

use crate::error::{Error, Result};

/// One point of a computed rate-distortion curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RdCurvePoint {
    pub distortion: f64,
    /// Bits per letter.
    pub rate: f64,
    pub converged: bool,
    /// Alternating-minimization steps summed over all slopes tried.
    pub iterations: usize,
    /// Lagrange slope `s <= 0` (nats per unit distortion).
    pub slope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaOptions {
    /// Alternating-minimization steps allowed per slope.
    pub max_iterations: usize,
    /// Bisection steps on `s`.
    pub bisection_steps: usize,
    /// Most negative slope considered.
    pub min_slope: f64,
}

impl Default for BaOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            bisection_steps: 100,
            min_slope: -50.0,
        }
    }
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// `max(0, 1 - h(D))`.
pub fn binary_hamming_rd(level: f64) -> f64 {
    if level >= 0.5 {
        0.0
    } else {
        (1.0 - binary_entropy(level)).max(0.0)
    }
}

/// `min_y E_p[d(X, y)]`, the smallest distortion reachable at rate 0.
pub fn d_max(p: &[f64], d: &[Vec<f64>]) -> f64 {
    let cols = d.first().map_or(0, Vec::len);
    (0..cols)
        .map(|y| p.iter().zip(d).map(|(px, row)| px * row[y]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn d_min(p: &[f64], d: &[Vec<f64>]) -> f64 {
    p.iter()
        .zip(d)
        .map(|(px, row)| px * row.iter().copied().fold(f64::INFINITY, f64::min))
        .sum()
}

fn validate(p: &[f64], d: &[Vec<f64>]) -> Result<()> {
    if p.is_empty() || p.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidPmf("probabilities must lie in [0, 1]".into()));
    }
    if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidPmf("probabilities must sum to 1".into()));
    }
    if d.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: d.len(),
        });
    }
    let cols = d[0].len();
    if cols == 0 || d.iter().any(|row| row.len() != cols) {
        return Err(Error::InvalidDistortion(
            "matrix rows must have equal, nonzero length".into(),
        ));
    }
    if d.iter().flatten().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidDistortion(
            "entries must be finite and nonnegative".into(),
        ));
    }
    Ok(())
}

/// Blahut-Arimoto iteration at a fixed slope `s`, from a uniform output
/// distribution. Stops when successive mutual-information values differ by
/// less than `tol`.
pub fn ba_at_slope(
    p: &[f64],
    d: &[Vec<f64>],
    slope: f64,
    tol: f64,
    max_iterations: usize,
) -> RdCurvePoint {
    let mut q = vec![1.0 / d[0].len() as f64; d[0].len()];
    iterate(p, d, slope, tol, max_iterations, &mut q)
}

/// Runs the alternating minimization starting from (and updating) the
/// output distribution `q`.
fn iterate(
    p: &[f64],
    d: &[Vec<f64>],
    slope: f64,
    tol: f64,
    max_iterations: usize,
    q: &mut Vec<f64>,
) -> RdCurvePoint {
    let cols = d[0].len();
    let weights: Vec<Vec<f64>> = d
        .iter()
        .map(|row| row.iter().map(|&v| (slope * v).exp()).collect())
        .collect();
    let mut cond = vec![vec![0.0; cols]; p.len()];
    let mut previous = f64::INFINITY;
    let mut point = RdCurvePoint {
        distortion: 0.0,
        rate: 0.0,
        converged: false,
        iterations: 0,
        slope,
    };
    for it in 1..=max_iterations {
        for (x, row) in cond.iter_mut().enumerate() {
            let mut norm = 0.0;
            for y in 0..cols {
                row[y] = q[y] * weights[x][y];
                norm += row[y];
            }
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
        let mut next = vec![0.0; cols];
        for (px, row) in p.iter().zip(&cond) {
            for (acc, w) in next.iter_mut().zip(row) {
                *acc += px * w;
            }
        }
        let mut distortion = 0.0;
        let mut rate = 0.0;
        for x in 0..p.len() {
            for y in 0..cols {
                let joint = p[x] * cond[x][y];
                if joint > 0.0 {
                    distortion += joint * d[x][y];
                    rate += joint * (cond[x][y] / next[y]).log2();
                }
            }
        }
        *q = next;
        point.distortion = distortion;
        point.rate = rate.max(0.0);
        point.iterations = it;
        if (rate - previous).abs() < tol {
            point.converged = true;
            break;
        }
        previous = rate;
    }
    point
}

/// `R(D)` in bits for source `p` and distortion matrix `d`, by bisection on
/// the slope until the achieved distortion is within `tol` of `level`.
pub fn blahut_arimoto(p: &[f64], d: &[Vec<f64>], level: f64, tol: f64) -> Result<RdCurvePoint> {
    blahut_arimoto_with(p, d, level, tol, BaOptions::default())
}

pub fn blahut_arimoto_with(
    p: &[f64],
    d: &[Vec<f64>],
    level: f64,
    tol: f64,
    options: BaOptions,
) -> Result<RdCurvePoint> {
    validate(p, d)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !(level >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distortion level must be nonnegative, got {level}"
        )));
    }
    if level >= d_max(p, d) {
        return Ok(RdCurvePoint {
            distortion: level,
            rate: 0.0,
            converged: true,
            iterations: 0,
            slope: 0.0,
        });
    }
    if level < d_min(p, d) - tol {
        return Err(Error::InvalidArgument(format!(
            "distortion {level} is below the smallest achievable {}",
            d_min(p, d)
        )));
    }

    // Each slope starts from the last output distribution; near slopes
    // where an output symbol drops out, a cold start converges very slowly.
    let mut total = 0usize;
    let mut q = vec![1.0 / d[0].len() as f64; d[0].len()];
    let mut eval = |s: f64| {
        let pt = iterate(p, d, s, tol, options.max_iterations, &mut q);
        total += pt.iterations;
        pt
    };
    let (mut lo, mut hi) = (options.min_slope, 0.0);
    let mut best = eval(lo);
    if best.distortion < level {
        for _ in 0..options.bisection_steps {
            let mid = 0.5 * (lo + hi);
            let pt = eval(mid);
            let hit = (pt.distortion - level).abs() < tol * 1e-3;
            if pt.distortion < level {
                lo = mid;
            } else {
                hi = mid;
            }
            best = pt;
            if hit {
                break;
            }
        }
    }
    if !best.converged {
        return Err(Error::NonConvergence { iterations: total });
    }
    // Move along the tangent (slope s nats, s / ln 2 bits) to the target.
    let rate = best.rate + best.slope / std::f64::consts::LN_2 * (level - best.distortion);
    Ok(RdCurvePoint {
        distortion: level,
        rate: rate.max(0.0),
        converged: true,
        iterations: total,
        slope: best.slope,
    })
}

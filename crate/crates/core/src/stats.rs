//! Binomial estimates with Wilson score intervals.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A Bernoulli frequency estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        assert!(successes <= trials, "successes exceed trials");
        Self { successes, trials }
    }

    pub fn point(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.successes as f64 / self.trials as f64
    }

    /// 95% Wilson score interval.
    pub fn wilson(&self) -> (f64, f64) {
        wilson_interval(self.successes, self.trials, Z95)
    }

    pub fn half_width(&self) -> f64 {
        let (lo, hi) = self.wilson();
        (hi - lo) / 2.0
    }

    pub fn contains(&self, p: f64) -> bool {
        let (lo, hi) = self.wilson();
        lo <= p && p <= hi
    }
}

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
/// The full unit interval when there are no trials.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - spread).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + spread).min(1.0)
    };
    (lo, hi)
}

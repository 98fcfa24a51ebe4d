//! Channel models: black boxes mapping an input block to an output block.
//!
//! Implementations are stateless; all randomness comes from the stream the
//! caller passes in.

use rand::Rng;

use crate::distortion::{DistortionFn, DistortionMatrix, Threshold};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::types::format_rational;
use crate::Rational;

pub trait ChannelModel: Send + Sync {
    fn name(&self) -> String;

    fn input_size(&self) -> usize;

    fn output_size(&self) -> usize;

    /// Output block of the same length as `x`, symbols in `0..output_size()`.
    fn transmit(&self, x: &[usize], rng: &mut Stream) -> Vec<usize>;
}

impl<C: ChannelModel + ?Sized> ChannelModel for Box<C> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn input_size(&self) -> usize {
        (**self).input_size()
    }

    fn output_size(&self) -> usize {
        (**self).output_size()
    }

    fn transmit(&self, x: &[usize], rng: &mut Stream) -> Vec<usize> {
        (**self).transmit(x, rng)
    }
}

/// Memoryless channel applying a row-stochastic matrix letter by letter.
#[derive(Clone, Debug)]
pub struct Dmc {
    matrix: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
    label: String,
}

impl Dmc {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::labelled(matrix, None)
    }

    fn labelled(matrix: Vec<Vec<f64>>, label: Option<String>) -> Result<Self> {
        let cols = matrix.first().map_or(0, Vec::len);
        if matrix.is_empty() || cols == 0 {
            return Err(Error::InvalidChannel("empty transition matrix".into()));
        }
        for (x, row) in matrix.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            if row.iter().any(|w| !(0.0..=1.0).contains(w)) {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has an entry outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidChannel(format!("row {x} sums to {sum}")));
            }
        }
        let cumulative = matrix
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect()
            })
            .collect();
        let label = label.unwrap_or_else(|| format!("dmc{matrix:?}"));
        Ok(Self {
            matrix,
            cumulative,
            label,
        })
    }

    /// Binary symmetric channel with crossover probability `eps`.
    pub fn bsc(eps: f64) -> Result<Self> {
        Self::labelled(
            vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]],
            Some(format!("bsc({eps})")),
        )
    }

    pub fn identity(size: usize) -> Result<Self> {
        let matrix = (0..size)
            .map(|x| (0..size).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::labelled(matrix, Some(format!("identity({size})")))
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    fn send_letter(&self, x: usize, rng: &mut Stream) -> usize {
        let row = &self.cumulative[x];
        let u: f64 = rng.random();
        row.iter().position(|&c| u < c).unwrap_or_else(|| {
            // u fell in rounding slack above the last cumulative value
            self.matrix[x].iter().rposition(|&w| w > 0.0).unwrap_or(0)
        })
    }
}

impl ChannelModel for Dmc {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn input_size(&self) -> usize {
        self.matrix.len()
    }

    fn output_size(&self) -> usize {
        self.cumulative[0].len()
    }

    fn transmit(&self, x: &[usize], rng: &mut Stream) -> Vec<usize> {
        x.iter().map(|&s| self.send_letter(s, rng)).collect()
    }
}

/// Outputs a uniform sample from `{y : d(x, y)/n <= radius}`.
///
/// Sampling is exact: a backward pass counts, for every position and
/// remaining distortion budget, the fraction of completions that stay within
/// the ball, and the forward pass draws each letter with those weights.
#[derive(Clone, Debug)]
pub struct BallChannel {
    d: DistortionMatrix,
    radius: Rational,
}

/// Largest table the ball sampler will build, in cells.
const BALL_TABLE_LIMIT: usize = 50_000_000;

impl BallChannel {
    pub fn new(d: DistortionMatrix, radius: Rational) -> Result<Self> {
        if radius < Rational::from_integer(0) {
            return Err(Error::InvalidArgument(format!("negative radius {radius}")));
        }
        // The ball of every input block is nonempty iff every input letter
        // has some output within the radius.
        for x in 0..d.rows() {
            let nearest = (0..d.cols())
                .map(|y| d.letter(x, y))
                .min()
                .unwrap_or_default();
            if nearest > radius {
                return Err(Error::EmptyBall(format_rational(&radius)));
            }
        }
        Ok(Self { d, radius })
    }

    pub fn radius(&self) -> Rational {
        self.radius
    }

    /// Fraction of each block's completions within budget, indexed
    /// `[position][budget]`.
    fn completion_table(&self, x: &[usize], budget: usize) -> Vec<Vec<f64>> {
        let n = x.len();
        let k = self.d.cols() as f64;
        let mut table = vec![vec![0.0; budget + 1]; n + 1];
        table[n].iter_mut().for_each(|v| *v = 1.0);
        for i in (0..n).rev() {
            let (head, tail) = table.split_at_mut(i + 1);
            let next = &tail[0];
            for b in 0..=budget {
                let mut acc = 0.0;
                for y in 0..self.d.cols() {
                    let c = self.d.scaled_letter(x[i], y) as usize;
                    if c <= b {
                        acc += next[b - c];
                    }
                }
                head[i][b] = acc / k;
            }
        }
        table
    }
}

impl ChannelModel for BallChannel {
    fn name(&self) -> String {
        format!("ball({})", format_rational(&self.radius))
    }

    fn input_size(&self) -> usize {
        self.d.rows()
    }

    fn output_size(&self) -> usize {
        self.d.cols()
    }

    fn transmit(&self, x: &[usize], rng: &mut Stream) -> Vec<usize> {
        let n = x.len();
        let max_total = (0..self.d.rows())
            .flat_map(|a| (0..self.d.cols()).map(move |b| (a, b)))
            .map(|(a, b)| self.d.scaled_letter(a, b))
            .max()
            .unwrap_or(0) as usize
            * n;
        let cutoff = Threshold::new(n, self.radius, self.d.scale())
            .expect("radius validated")
            .cutoff();
        let budget = (cutoff as usize).min(max_total);
        assert!(
            (n + 1) * (budget + 1) <= BALL_TABLE_LIMIT,
            "ball sampler table too large for block length {n}"
        );
        let table = self.completion_table(x, budget);
        let mut left = budget;
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let weights: Vec<f64> = (0..self.d.cols())
                .map(|b| {
                    let c = self.d.scaled_letter(x[i], b) as usize;
                    if c <= left {
                        table[i + 1][left - c]
                    } else {
                        0.0
                    }
                })
                .collect();
            let total: f64 = weights.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut pick = weights
                .iter()
                .rposition(|&w| w > 0.0)
                .expect("ball is nonempty");
            for (b, &w) in weights.iter().enumerate() {
                if w > 0.0 && u < w {
                    pick = b;
                    break;
                }
                u -= w;
            }
            left -= self.d.scaled_letter(x[i], pick) as usize;
            y.push(pick);
        }
        y
    }
}

/// A channel wrapped in a repetition code: each input letter is sent
/// `repeat` times and the receiver takes a plurality vote per block (ties to
/// the smallest symbol). `repeat = 1` is the identity wrapper.
pub struct Repetition<C> {
    inner: C,
    repeat: usize,
}

impl<C: ChannelModel> Repetition<C> {
    pub fn new(inner: C, repeat: usize) -> Result<Self> {
        if repeat == 0 {
            return Err(Error::InvalidArgument(
                "repetition factor must be positive".into(),
            ));
        }
        if inner.input_size() != inner.output_size() {
            return Err(Error::InvalidChannel(
                "repetition decoding needs equal input and output alphabets".into(),
            ));
        }
        Ok(Self { inner, repeat })
    }
}

impl<C: ChannelModel> ChannelModel for Repetition<C> {
    fn name(&self) -> String {
        format!("repeat{}({})", self.repeat, self.inner.name())
    }

    fn input_size(&self) -> usize {
        self.inner.input_size()
    }

    fn output_size(&self) -> usize {
        self.inner.output_size()
    }

    fn transmit(&self, x: &[usize], rng: &mut Stream) -> Vec<usize> {
        let coded: Vec<usize> = x
            .iter()
            .flat_map(|&s| std::iter::repeat_n(s, self.repeat))
            .collect();
        let received = self.inner.transmit(&coded, rng);
        let mut votes = vec![0usize; self.output_size()];
        received
            .chunks(self.repeat)
            .map(|block| {
                votes.iter_mut().for_each(|v| *v = 0);
                for &s in block {
                    votes[s] += 1;
                }
                let top = *votes.iter().max().unwrap_or(&0);
                votes.iter().position(|&v| v == top).unwrap_or(0)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use crate::types::for_each_member;
    use crate::types::TypeVector;
    use std::collections::HashMap;

    fn rng(i: u64) -> Stream {
        StreamKey::new(21, "channel-test", &[]).stream(i)
    }

    #[test]
    fn rejects_non_stochastic_matrices() {
        assert!(Dmc::new(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).is_err());
        assert!(Dmc::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(Dmc::new(vec![vec![1.0], vec![0.5, 0.5]]).is_err());
        assert!(Dmc::new(vec![]).is_err());
    }

    #[test]
    fn identity_and_constant_dmcs() {
        let id = Dmc::identity(3).unwrap();
        let x = vec![0, 2, 1, 1, 0, 2];
        assert_eq!(id.transmit(&x, &mut rng(0)), x);
        let constant = Dmc::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(constant.transmit(&[0, 1, 0, 0], &mut rng(1)), vec![1; 4]);
    }

    #[test]
    fn bsc_flip_rate() {
        let ch = Dmc::bsc(0.05).unwrap();
        let x = vec![0usize; 100_000];
        let flips: usize = ch.transmit(&x, &mut rng(2)).iter().sum();
        assert!((4_500..5_500).contains(&flips), "{flips}");
    }

    #[test]
    fn ball_radius_zero_is_identity() {
        let ch =
            BallChannel::new(DistortionMatrix::hamming(2, 2), Rational::from_integer(0)).unwrap();
        let x = vec![1, 0, 0, 1, 1];
        for i in 0..20 {
            assert_eq!(ch.transmit(&x, &mut rng(i)), x);
        }
    }

    #[test]
    fn ball_full_radius_is_uniform() {
        let ch =
            BallChannel::new(DistortionMatrix::hamming(2, 2), Rational::from_integer(1)).unwrap();
        let mut freq = HashMap::new();
        for i in 0..16_000 {
            *freq
                .entry(ch.transmit(&[0, 1, 1], &mut rng(i)))
                .or_insert(0) += 1;
        }
        assert_eq!(freq.len(), 8);
        assert!(
            freq.values().all(|&c| (1_700..2_300).contains(&c)),
            "{freq:?}"
        );
    }

    #[test]
    fn ball_outputs_stay_within_radius_on_all_inputs() {
        let d = DistortionMatrix::hamming(2, 2);
        let ch = BallChannel::new(d.clone(), Rational::new(1, 4)).unwrap();
        for w in 0..=4 {
            let t = TypeVector::new(vec![4 - w, w]).unwrap();
            for_each_member(&t, |x| {
                let mut seen = HashMap::new();
                for i in 0..500 {
                    let y = ch.transmit(x, &mut rng(i));
                    assert!(d.scaled_total(x, &y) <= 1);
                    *seen.entry(y).or_insert(0) += 1;
                }
                // the ball holds x and its four single-flip neighbours
                assert_eq!(seen.len(), 5);
            });
        }
    }

    #[test]
    fn empty_ball_is_rejected() {
        let d = DistortionMatrix::new(
            2,
            2,
            vec![
                Rational::from_integer(1),
                Rational::from_integer(2),
                Rational::from_integer(2),
                Rational::from_integer(0),
            ],
        )
        .unwrap();
        assert!(matches!(
            BallChannel::new(d, Rational::new(1, 2)),
            Err(Error::EmptyBall(_))
        ));
    }

    #[test]
    fn repetition_corrects_isolated_flips() {
        let ch = Repetition::new(Dmc::bsc(0.01).unwrap(), 5).unwrap();
        let x: Vec<usize> = (0..1000).map(|i| i % 2).collect();
        let y = ch.transmit(&x, &mut rng(7));
        let errors = x.iter().zip(&y).filter(|(a, b)| a != b).count();
        assert!(errors <= 2, "{errors}");
        let plain = Repetition::new(Dmc::identity(2).unwrap(), 1).unwrap();
        assert_eq!(plain.transmit(&x, &mut rng(8)), x);
    }
}

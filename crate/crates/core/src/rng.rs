//! Deterministic random substreams.
//!
//! Every random draw in the crate comes from a [`Stream`] obtained from a
//! [`StreamKey`]: a master seed, a purpose label and grid coordinates. Each
//! trial gets its own ChaCha stream index, so results do not depend on how
//! trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Identifies a family of substreams.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamKey {
    seed: [u8; 32],
}

impl StreamKey {
    pub fn new(master_seed: u64, purpose: &str, coords: &[u64]) -> Self {
        let mut state = splitmix(master_seed ^ 0x6a09_e667_f3bc_c909);
        for b in purpose.bytes() {
            state = splitmix(state ^ u64::from(b));
        }
        state = splitmix(state ^ coords.len() as u64);
        for &c in coords {
            state = splitmix(state ^ c);
        }
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_mut(8) {
            state = splitmix(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self { seed }
    }

    /// Key for a nested purpose under this one.
    pub fn child(&self, purpose: &str, coords: &[u64]) -> Self {
        let base = u64::from_le_bytes(self.seed[..8].try_into().unwrap());
        Self::new(base, purpose, coords)
    }

    /// The `index`-th substream.
    pub fn stream(&self, index: u64) -> Stream {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(index);
        rng
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs `trial(i, stream_i)` for `i in 0..trials` and sums the returned
/// count vectors. Parallel when the `parallel` feature is on; the result is
/// identical either way because each trial owns its substream.
pub fn run_trials<const K: usize, F>(key: &StreamKey, trials: u64, trial: F) -> [u64; K]
where
    F: Fn(u64, &mut Stream) -> [u64; K] + Sync,
{
    let add = |mut a: [u64; K], b: [u64; K]| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };
    let one = |i: u64| trial(i, &mut key.stream(i));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(one).reduce(|| [0; K], add)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(one).fold([0; K], add)
    }
}

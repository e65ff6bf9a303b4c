//! Counter-addressed Gaussian substreams.
//!
//! Every path owns a ChaCha8 stream selected by `(seed, path index)`. Draw
//! number `k` on that stream always occupies 32-bit words `[4k, 4k + 4)`, so a
//! Gaussian increment is a pure function of `(seed, path, step)` and paths can
//! be generated in any order or thread layout.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS_PER_DRAW: u128 = 4;
const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct NormalSubstream {
    rng: ChaCha8Rng,
}

impl NormalSubstream {
    pub fn new(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        Self { rng }
    }

    /// Position the stream so the next draw is draw number `index`.
    pub fn seek(&mut self, index: u64) {
        self.rng.set_word_pos(index as u128 * WORDS_PER_DRAW);
    }

    /// One standard normal variate via Box-Muller, consuming exactly two u64.
    pub fn next_standard_normal(&mut self) -> f64 {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        // u1 in (0, 1], u2 in [0, 1)
        let u1 = ((a >> 11) + 1) as f64 * INV_2_53;
        let u2 = (b >> 11) as f64 * INV_2_53;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Draw number `index` without disturbing sequential use semantics.
    pub fn standard_normal_at(&mut self, index: u64) -> f64 {
        self.seek(index);
        self.next_standard_normal()
    }
}

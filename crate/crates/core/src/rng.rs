//! Seedable randomness with a fixed stream-splitting rule.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by
//! the user-visible 64-bit seed. Independent components get independent
//! streams of the same keyed generator, never a reseed, so runs are
//! reproducible and two samplers can be forced to share draw sequences by
//! sharing (seed, chain, purpose, index).
//!
//! Stream id layout: bits 0..8 purpose, bits 8..40 index (sample number or
//! other per-purpose counter), bits 40..64 chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Copy, Clone, Debug)]
pub enum Purpose {
    /// Which node an MCMC step visits.
    NodeChoice = 1,
    /// Categorical value draws (CPT rows, proposals, blanket conditionals).
    Value = 2,
    /// Accept/reject uniforms in Metropolis-Hastings.
    Uniform = 3,
    /// Forward-sampled initial chain state.
    Init = 4,
    /// Per-sample stream of importance sampling.
    Sample = 5,
    /// Quantum measurement outcomes.
    Measure = 6,
}

pub fn stream(seed: u64, chain: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((chain << 40) | (index << 8) | purpose as u64);
    rng
}

/// Inverse-CDF draw over an unnormalized-free probability row, with strict
/// `u < cumulative`. If floating dust leaves `u` past the total, the last
/// index with positive probability is returned, so zero-probability states
/// are never drawn.
pub fn draw_categorical(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    let mut last_positive = 0usize;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        cum += p;
        if u < cum {
            return i;
        }
    }
    last_positive
}

//! Seeded random streams.
//!
//! All randomness goes through ChaCha8, whose output for a given seed is
//! fixed by its published algorithm and identical on every platform. The
//! population and each search chain use separate ChaCha stream ids so they
//! never share keystream even when their seeds coincide.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SearchRng = ChaCha8Rng;

const POPULATION_STREAM: u64 = 0;
const CHAIN_STREAM: u64 = 1;
const SYNTH_STREAM: u64 = 2;

fn stream(seed: u64, id: u64) -> SearchRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Stream used to draw the initial population.
pub fn population_rng(seed: u64) -> SearchRng {
    stream(seed, POPULATION_STREAM)
}

/// Stream owned by chain (or restart) `index`; seeded with `seed + index`.
pub fn chain_rng(seed: u64, index: usize) -> SearchRng {
    stream(seed.wrapping_add(index as u64), CHAIN_STREAM)
}

/// Stream for the synthetic matrix generator.
pub fn synth_rng(seed: u64) -> SearchRng {
    stream(seed, SYNTH_STREAM)
}

//! Deterministic seed derivation. Every trial seed is a hash of the base seed
//! and the cell coordinates, so adding or removing cells leaves the others
//! untouched.

/// One step of SplitMix64.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a list of words into one seed.
pub fn hash_words(words: &[u64]) -> u64 {
    words.iter().fold(0x6a09_e667_f3bc_c908, |h, w| splitmix64(h ^ splitmix64(*w)))
}

/// Seed of trial `trial` in the grid cell `(a, b)`.
pub fn cell_seed(base: u64, a: f64, b: f64, trial: usize) -> u64 {
    hash_words(&[base, a.to_bits(), b.to_bits(), trial as u64])
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Stream {
    Matrix = 1,
    Support = 2,
    Values = 3,
    Noise = 4,
}

/// Independent sub-seed for one random stream of a problem.
pub(crate) fn derive(seed: u64, stream: Stream) -> u64 {
    hash_words(&[seed, stream as u64])
}

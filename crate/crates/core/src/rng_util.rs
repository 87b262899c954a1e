//! Seed derivation helpers shared across the crate.

/// SplitMix64 finalizer: a cheap, well-mixed 64-bit hash step.
pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a sequence of words into one seed, order-sensitively.
pub(crate) fn mix_seed(words: &[u64]) -> u64 {
    let mut h = 0x243F_6A88_85A3_08D3; // pi digits, nothing up the sleeve
    for &w in words {
        h = splitmix64(h ^ w);
    }
    h
}

//! Seed derivation for nested deterministic randomness.
//!
//! Studies need many independent random streams (one per perturbation round,
//! per probe run, ...) that are all reproducible from a single master seed.
//! Streams are derived with the SplitMix64 finalizer, so stream `k` of a
//! master seed is a fixed, platform-independent function of `(master, k)`.

/// SplitMix64 output function (Steele, Lea & Flood 2014).
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for stream `stream` of `master`.
///
/// The mapping is injective in `stream` for a fixed master and scrambles
/// both arguments, so `derive_seed(m, 0), derive_seed(m, 1), ...` form a
/// counter scheme: the streams used for `k` rounds are a prefix of the
/// streams used for any larger round count.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(stream.wrapping_add(0xA5A5_A5A5_A5A5_A5A5)))
}

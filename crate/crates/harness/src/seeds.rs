//! Per-sample seed derivation.

/// One round of the splitmix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sample `index` in an ensemble with base seed `base`.
///
/// Depends only on `(base, index)`, so extending an ensemble keeps the seeds of
/// existing samples.
pub fn sample_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(index))
}

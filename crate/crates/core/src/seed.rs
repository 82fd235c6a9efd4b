//! Deterministic seed derivation.
//!
//! One master seed fans out into independent per-window and per-chunk
//! streams through a splitmix64 step, so a batch of `n` windows is a prefix
//! of the batch of `n + 1` windows and results never depend on scheduling.

/// splitmix64 finalizer (Vigna's constants).
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `index` derived from `master`.
///
/// `derive(master, i)` depends only on `(master, i)`, so growing a batch
/// leaves earlier streams untouched.
pub fn derive(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

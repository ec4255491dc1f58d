//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by the
//! user's 64-bit seed. Work items pick a stream number from a
//! `(domain, major, minor)` triple, e.g. `(BOOTSTRAP, attribute, replicate)`.
//! ChaCha is counter based, so stream `k` is the same sequence no matter
//! which thread asks for it or in what order, and no platform-dependent
//! integer widths are involved.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains. Distinct domains never share a stream number.
pub mod domain {
    pub const BOOTSTRAP: u64 = 1;
    pub const SUBSAMPLE: u64 = 2;
    pub const SCENARIO: u64 = 3;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream number for a `(domain, major, minor)` work item.
pub fn stream_id(domain: u64, major: u64, minor: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(domain) ^ major) ^ minor)
}

/// Generator for one work item.
pub fn stream(seed: u64, domain: u64, major: u64, minor: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(domain, major, minor));
    rng
}

/// Standard normal draw by Marsaglia's polar method. Only IEEE-exact
/// operations and `libm::log` are involved, so a stream yields the same
/// values on every platform.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * libm::log(s) / s).sqrt();
        }
    }
}

/// FNV-1a over a label, used to key streams by scenario name.
pub fn label_key(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

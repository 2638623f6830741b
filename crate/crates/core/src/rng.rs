//! Stable hashing and counter-based random streams.
//!
//! Every random decision is drawn from a stream keyed by
//! `(seed, paragraph id, channel)`, so a paragraph masks the same way no
//! matter which worker handles it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over `bytes`, continuing from `state`.
pub fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(state, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Platform-independent 64-bit hash of `(source id, paragraph index)`.
pub fn paragraph_hash(source_id: &str, index: u64) -> u64 {
    let h = fnv1a(FNV_OFFSET, source_id.as_bytes());
    let h = fnv1a(h, &[0xff]);
    mix64(fnv1a(h, &index.to_le_bytes()))
}

/// Independent random channels of the masker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Channel {
    Indicator = 1,
    Unrelated = 2,
    Mlm = 3,
}

/// The random stream for one paragraph and channel.
pub fn stream(seed: u64, paragraph: u64, channel: Channel) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let words = [
        mix64(seed),
        mix64(paragraph ^ 0x9e37_79b9_7f4a_7c15),
        mix64(channel as u64),
        mix64(seed ^ paragraph.rotate_left(17) ^ (channel as u64).rotate_left(41)),
    ];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

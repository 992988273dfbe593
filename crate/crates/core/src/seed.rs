//! Labeled seed derivation.
//!
//! Every random stream in the pipeline is keyed by the user seed plus a
//! tuple of labels, so streams do not depend on the order in which they are
//! requested.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// One component of a seed key.
#[derive(Debug, Clone, Copy)]
pub enum Key<'a> {
    Str(&'a str),
    Int(u64),
}

/// Mixes `seed` with `parts` into a new 64-bit seed (FNV-1a over a
/// length-prefixed encoding, then a SplitMix64 finalizer).
pub fn derive_seed(seed: u64, parts: &[Key<'_>]) -> u64 {
    let mut h = FNV_OFFSET;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
    };
    feed(&seed.to_le_bytes());
    for part in parts {
        match part {
            Key::Str(s) => {
                feed(&[0]);
                feed(&(s.len() as u64).to_le_bytes());
                feed(s.as_bytes());
            }
            Key::Int(v) => {
                feed(&[1]);
                feed(&v.to_le_bytes());
            }
        }
    }
    splitmix64(h)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64, parts: &[Key<'_>]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, parts))
}

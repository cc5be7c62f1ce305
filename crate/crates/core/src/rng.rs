//! Seed derivation and per-entity random streams.
//!
//! Every stochastic entity (a source, a node's service process) owns a
//! ChaCha8 stream seeded from `(seed, day, entity tag)` through a
//! splitmix64 mix, so streams never overlap and adding an entity leaves
//! the others untouched.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// One step of the splitmix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a tag.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    splitmix64(parent ^ splitmix64(tag))
}

/// Identifies a random substream inside one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamId {
    Source(u32),
    Service(u32),
}

impl StreamId {
    fn tag(self) -> u64 {
        match self {
            StreamId::Source(id) => (1u64 << 32) | u64::from(id),
            StreamId::Service(id) => (2u64 << 32) | u64::from(id),
        }
    }
}

/// Opens the stream for `entity` in replication `(seed, day)`.
pub fn stream(seed: u64, day: u32, entity: StreamId) -> Stream {
    let day_seed = derive_seed(seed, u64::from(day));
    Stream::seed_from_u64(derive_seed(day_seed, entity.tag()))
}

/// Uniform draw on the open interval (0, 1). Zero is redrawn; one is never
/// produced by the 53-bit construction.
#[inline]
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

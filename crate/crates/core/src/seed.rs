//! Deterministic derivation of per-purpose seeds from a single master seed.
//!
//! Every randomized stage draws from its own stream so that changing how one
//! stage consumes randomness never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The randomized stages of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stream {
    TraceSynthesis,
    Assignment,
    RatingSampling,
    FactorInit,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::TraceSynthesis => 0x7472_6163_6500_0001,
            Stream::Assignment => 0x6173_7369_676e_0002,
            Stream::RatingSampling => 0x7361_6d70_6c65_0003,
            Stream::FactorInit => 0x6661_6374_6f72_0004,
        }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed for `stream` from `master`.
pub fn derive(master: u64, stream: Stream) -> u64 {
    mix(mix(master) ^ stream.tag())
}

/// Derives the seed for the `index`-th replicate of `stream`.
pub fn derive_indexed(master: u64, stream: Stream, index: u64) -> u64 {
    mix(derive(master, stream) ^ mix(index.wrapping_add(1)))
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All sub-seeds of a run, as recorded in run manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub master: u64,
    pub trace: u64,
    pub assignment: u64,
    pub sampling: u64,
    pub factor_init: u64,
}

impl SeedSet {
    pub fn from_master(master: u64) -> Self {
        SeedSet {
            master,
            trace: derive(master, Stream::TraceSynthesis),
            assignment: derive(master, Stream::Assignment),
            sampling: derive(master, Stream::RatingSampling),
            factor_init: derive(master, Stream::FactorInit),
        }
    }
}

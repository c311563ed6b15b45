//! Seeded random streams.
//!
//! Every random quantity in a run is drawn from its own ChaCha stream, keyed by
//! the user seed and a fixed stream tag, so input, noise and channel draws stay
//! independent of each other and of the order in which they are requested.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Values are arbitrary but frozen: changing them changes every run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Input,
    Noise,
    ChannelBefore,
    ChannelAfter,
    SparsePositions,
    SparseAmplitudes,
    DispersiveTaps,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Input => 0x1,
            Stream::Noise => 0x2,
            Stream::ChannelBefore => 0x3,
            Stream::ChannelAfter => 0x4,
            Stream::SparsePositions => 0x10,
            Stream::SparseAmplitudes => 0x11,
            Stream::DispersiveTaps => 0x12,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` for the given stream.
pub fn derive_seed(seed: u64, stream: Stream) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.tag().wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream))
}

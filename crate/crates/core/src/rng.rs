//! Seeded random streams.
//!
//! Every randomized routine takes either an explicit `&mut impl Rng` or a
//! [`StreamSeed`] from which independent substreams are derived by
//! `(tag, index)`. Substreams are ChaCha8 generators keyed by the run seed
//! and tag, with the index selecting the ChaCha stream, so parallel work
//! indexed by sample number is independent of the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Tags naming the independent substream families of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamTag {
    Masks = 1,
    Signs = 2,
    DataBatch = 3,
    ModelSamples = 4,
    Init = 5,
    Shuffle = 6,
    Generator = 7,
    Baseline = 8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamSeed(pub u64);

impl StreamSeed {
    pub fn new(seed: u64) -> Self {
        StreamSeed(seed)
    }

    /// Substream `index` of the family `tag`.
    pub fn substream(self, tag: StreamTag, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(self.0 ^ splitmix(tag as u64)));
        rng.set_stream(index);
        rng
    }

    /// A child seed, used to give each training step or repeat its own family.
    pub fn child(self, index: u64) -> StreamSeed {
        StreamSeed(splitmix(self.0.wrapping_add(splitmix(index.wrapping_add(0x9E37_79B9)))))
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

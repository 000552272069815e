//! Splittable, counter-based random streams.
//!
//! A [`StreamId`] is a value-type identity `(seed, stream_id)`. Materializing
//! it yields an [`RngStream`], a ChaCha8 generator whose output sequence is a
//! pure function of the identity, independent of platform and of any other
//! stream. Children derived with [`StreamId::child`] are statistically
//! independent, which is what lets batch estimators run concurrently while
//! producing results that do not depend on the worker count.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identity of a random stream: master seed plus a derivation counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub seed: u64,
    pub stream_id: u64,
}

impl StreamId {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        StreamId { seed, stream_id }
    }

    /// Derive an independent child stream. Mixing both words through
    /// splitmix64 keeps distinct `(stream_id, k)` pairs from colliding.
    pub fn child(&self, k: u64) -> StreamId {
        StreamId {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(k.wrapping_add(1))),
        }
    }

    /// Materialize the stream as a generator positioned at its start.
    pub fn stream(&self) -> RngStream {
        RngStream::new(self.seed, self.stream_id)
    }
}

impl std::fmt::Display for StreamId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.seed, self.stream_id)
    }
}

/// A stateful generator for one stream. Never share one stream across
/// workers; derive children instead.
#[derive(Debug, Clone)]
pub struct RngStream {
    id: StreamId,
    chacha: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut key = [0u8; 32];
        let mut s = splitmix64(seed);
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&s.to_le_bytes());
            s = splitmix64(s);
        }
        let mut chacha = ChaCha8Rng::from_seed(key);
        chacha.set_stream(stream_id);
        RngStream {
            id: StreamId { seed, stream_id },
            chacha,
        }
    }

    pub fn id(&self) -> StreamId {
        self.id
    }

    pub fn seed(&self) -> u64 {
        self.id.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.id.stream_id
    }

    /// Independent child stream (fresh cursor).
    pub fn child(&self, k: u64) -> RngStream {
        self.id.child(k).stream()
    }

    /// One standard normal draw.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.sample(rand_distr::StandardNormal)
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.gen::<f64>()
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.chacha.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.chacha.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.chacha.fill_bytes(dest)
    }

    #[inline]
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.chacha.try_fill_bytes(dest)
    }
}

/// Fixed decomposition of a sample budget into batches. The plan, not the
/// scheduler, decides which stream generates which sample, so estimates are
/// reproducible under any degree of parallelism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub total: u64,
    pub batch_size: u64,
}

pub const DEFAULT_BATCH: u64 = 16_384;

impl SamplePlan {
    pub fn with_total(total: u64) -> Self {
        SamplePlan {
            total,
            batch_size: DEFAULT_BATCH.min(total.max(1)),
        }
    }

    pub fn batch_count(&self) -> u64 {
        if self.total == 0 {
            0
        } else {
            (self.total + self.batch_size - 1) / self.batch_size
        }
    }

    /// Batches as `(index, size)`; the last batch may be short.
    pub fn batches(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let total = self.total;
        let bs = self.batch_size;
        (0..self.batch_count()).map(move |b| {
            let start = b * bs;
            (b, bs.min(total - start))
        })
    }
}

//! Counter-based random streams.
//!
//! Every stream is identified by `(master_seed, person_index, tag)` and,
//! optionally, a draw epoch. Output `i` of a stream is a pure function of
//! its key and `i`, so how many values one stream consumes (for example in
//! a rejection loop) never shifts the values of another, and results do not
//! depend on which thread runs which person.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer (Stafford variant 13).
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn combine(key: u64, word: u64) -> u64 {
    mix64(key ^ mix64(word.wrapping_add(GOLDEN_GAMMA)))
}

/// What a stream is used for. Distinct tags give independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamTag {
    U,
    Nu1,
    Nu2,
    /// Age and BMI of a synthetic person.
    Demographics,
    /// Day-to-day activity jitter of a synthetic person.
    Activity,
    /// Synthetic ambient ozone fields.
    Ambient,
}

impl StreamTag {
    fn code(self) -> u64 {
        match self {
            StreamTag::U => 1,
            StreamTag::Nu1 => 2,
            StreamTag::Nu2 => 3,
            StreamTag::Demographics => 4,
            StreamTag::Activity => 5,
            StreamTag::Ambient => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    master_seed: u64,
    person_index: u64,
    tag: StreamTag,
    key: u64,
    counter: u64,
}

impl RandomStream {
    pub fn new(master_seed: u64, person_index: u64, tag: StreamTag) -> Self {
        let key = combine(combine(mix64(master_seed), person_index), tag.code());
        Self { master_seed, person_index, tag, key, counter: 0 }
    }

    /// A child stream keyed additionally by `word` (a draw epoch, a day).
    /// Children of the same parent with distinct words are independent.
    pub fn child(&self, word: u64) -> Self {
        Self {
            key: combine(self.key, word ^ 0x5bd1_e995_0000_0000),
            counter: 0,
            ..self.clone()
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn person_index(&self) -> u64 {
        self.person_index
    }

    pub fn tag(&self) -> StreamTag {
        self.tag
    }

    /// Number of 64-bit words consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RandomStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

//! Counter-based keyed pseudorandom function.
//!
//! Every random quantity in an environment is a pure function of the master
//! seed and a structured input (edge endpoints, vertex, direction class,
//! frog origin and step). Nothing is streamed from a stateful generator, so
//! evaluations agree across call orders, thread counts, and processes.

/// Weyl increment used for domain and word separation.
const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// 64-bit finalizer with full avalanche (Stafford variant 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Input domains; distinct domains give independent value streams for the
/// same structured input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    EdgeWeight = 1,
    VertexColor = 2,
    DirectionRate = 3,
    FrogStep = 4,
    SampleSeed = 5,
    Generic = 6,
}

/// Keyed pseudorandom function over word sequences.
#[derive(Debug, Clone, Copy)]
pub struct Prf {
    key: u64,
}

impl Prf {
    pub fn new(master_seed: u64, domain: Domain) -> Self {
        Prf {
            key: mix64(master_seed ^ (domain as u64).wrapping_mul(GAMMA)),
        }
    }

    /// Deterministic value for a structured input.
    pub fn value(&self, words: &[u64]) -> u64 {
        let mut h = self.key;
        for (i, &w) in words.iter().enumerate() {
            h = mix64(h ^ mix64(w ^ (i as u64 + 1).wrapping_mul(GAMMA)));
        }
        mix64(h ^ (words.len() as u64).wrapping_mul(GAMMA))
    }

    /// Uniform double in [0, 1) with 53 random bits.
    pub fn unit_f64(&self, words: &[u64]) -> f64 {
        (self.value(words) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in 0..n, computed by fixed-point multiplication so the
    /// result is identical on every platform.
    pub fn index(&self, words: &[u64], n: usize) -> usize {
        ((self.value(words) as u128 * n as u128) >> 64) as usize
    }
}

/// Encodes signed coordinates as PRF words.
pub fn coord_words(coords: &[i64]) -> smallvec::SmallVec<[u64; 8]> {
    coords.iter().map(|&c| c as u64).collect()
}

/// Derives an independent child seed from a master seed and a path of
/// indices (task id, rung, sample, ...).
pub fn derive_seed(master_seed: u64, path: &[u64]) -> u64 {
    Prf::new(master_seed, Domain::SampleSeed).value(path)
}

/// A small sequential stream for simulation-internal randomness where an
/// explicit counter is clumsy (test data, shuffles). Still fully
/// deterministic: the stream is a pure function of (seed, stream id, draw
/// index).
#[derive(Debug, Clone)]
pub struct SplitStream {
    state: u64,
}

impl SplitStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        SplitStream {
            state: mix64(seed ^ stream.wrapping_mul(GAMMA)),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [lo, hi], inclusive.
    pub fn next_i64_in(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (((self.next_u64() as u128 * span as u128) >> 64) as u64) as i64
    }

    pub fn next_index(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

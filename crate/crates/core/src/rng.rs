//! Word sources driving the shuffle and the simulated timer.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Precomputed rejection threshold for draws in `[0, bound)`.
///
/// Words at or above `floor(2^64 / bound) * bound` are rejected, so reducing
/// an accepted word modulo `bound` is exactly uniform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bound {
    bound: u64,
    /// `floor(2^64 / bound) * bound`, or 0 when `bound` divides `2^64`.
    limit: u64,
}

impl Bound {
    pub fn new(bound: u64) -> Self {
        assert!(bound > 0, "bounded draw needs a positive bound");
        // 2^64 mod bound
        let excess = (u64::MAX % bound + 1) % bound;
        Bound {
            bound,
            limit: 0u64.wrapping_sub(excess),
        }
    }

    pub fn get(&self) -> u64 {
        self.bound
    }

    #[inline]
    fn accept(&self, word: u64) -> Option<u64> {
        (self.limit == 0 || word < self.limit).then(|| word % self.bound)
    }
}

/// A source of uniform 64-bit words with an exact bounded draw.
pub trait EngineRng {
    fn next_u64(&mut self) -> u64;

    /// Uniform draw in `[0, bound.get())` by rejection sampling.
    #[inline]
    fn draw(&mut self, bound: &Bound) -> u64 {
        loop {
            if let Some(v) = bound.accept(self.next_u64()) {
                return v;
            }
        }
    }

    /// Uniform draw in `[0, bound)`.
    fn bounded(&mut self, bound: u64) -> u64 {
        self.draw(&Bound::new(bound))
    }
}

impl<R: EngineRng + ?Sized> EngineRng for &mut R {
    fn next_u64(&mut self) -> u64 {
        (**self).next_u64()
    }

    fn draw(&mut self, bound: &Bound) -> u64 {
        (**self).draw(bound)
    }
}

/// Reproducible generator: ChaCha8 keyed from a 64-bit seed.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
    seed: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    /// Replace the key; subsequent words depend only on `seed`.
    pub fn reseed(&mut self, seed: u64) {
        self.inner = ChaCha8Rng::seed_from_u64(seed);
        self.seed = seed;
    }

    /// The seed most recently installed.
    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl EngineRng for SeededRng {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

/// Replays a fixed word sequence, then repeats the last word forever. Test
/// scaffolding.
#[derive(Debug, Clone)]
pub struct ScriptedRng {
    words: Vec<u64>,
    pos: usize,
}

impl ScriptedRng {
    pub fn new(words: Vec<u64>) -> Self {
        assert!(!words.is_empty(), "scripted rng needs at least one word");
        ScriptedRng { words, pos: 0 }
    }

    /// Number of words handed out so far.
    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl EngineRng for ScriptedRng {
    fn next_u64(&mut self) -> u64 {
        let word = self.words[self.pos.min(self.words.len() - 1)];
        self.pos += 1;
        word
    }
}

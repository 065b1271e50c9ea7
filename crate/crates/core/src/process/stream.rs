//! Counter-based random streams.
//!
//! A stream is addressed by `(seed, path, generation)`: the seed keys a
//! ChaCha8 generator, the path selects its 64-bit stream id and the
//! generation selects a block of `2^22` uniforms inside that stream. Any
//! single draw can therefore be regenerated without replaying the others.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniforms available to one generation.
pub const GENERATION_CAPACITY: u64 = 1 << 22;

/// Position of a uniform: `index` counts draws within the generation block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DrawIndex {
    pub generation: u64,
    pub index: u64,
}

#[derive(Debug, Clone)]
pub struct Draws {
    rng: ChaCha8Rng,
    seed: u64,
    path: u64,
    position: DrawIndex,
}

impl Draws {
    pub fn new(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        let mut draws = Self {
            rng,
            seed,
            path,
            position: DrawIndex {
                generation: 0,
                index: 0,
            },
        };
        draws.seek(0, 0);
        draws
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> u64 {
        self.path
    }

    /// Index of the next uniform to be drawn.
    pub fn position(&self) -> DrawIndex {
        self.position
    }

    /// Moves to uniform `index` of `generation`.
    pub fn seek(&mut self, generation: u64, index: u64) {
        assert!(index < GENERATION_CAPACITY, "draw index beyond generation block");
        // Each uniform consumes two 32-bit words.
        let word = (u128::from(generation) * u128::from(GENERATION_CAPACITY) + u128::from(index)) * 2;
        self.rng.set_word_pos(word);
        self.position = DrawIndex { generation, index };
    }

    /// A uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        assert!(
            self.position.index < GENERATION_CAPACITY,
            "generation block exhausted"
        );
        let bits = self.rng.next_u64() >> 11;
        self.position.index += 1;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_sequential() {
        let mut a = Draws::new(7, 3);
        a.seek(5, 0);
        let seq: Vec<f64> = (0..10).map(|_| a.uniform()).collect();
        let mut b = Draws::new(7, 3);
        b.seek(5, 6);
        assert_eq!(b.uniform(), seq[6]);
        b.seek(5, 2);
        assert_eq!(b.uniform(), seq[2]);
    }

    #[test]
    fn streams_are_distinct() {
        let mut a = Draws::new(7, 3);
        let mut b = Draws::new(7, 4);
        let mut c = Draws::new(8, 3);
        let (x, y, z) = (a.uniform(), b.uniform(), c.uniform());
        assert!(x != y && x != z && y != z);
        a.seek(1, 0);
        let mut d = Draws::new(7, 3);
        assert_ne!(a.uniform(), d.uniform());
    }

    #[test]
    fn uniforms_in_open_interval() {
        let mut a = Draws::new(0, 0);
        let mut mean = 0.0;
        for _ in 0..100_000 {
            let u = a.uniform();
            assert!(u > 0.0 && u < 1.0);
            mean += u;
        }
        mean /= 100_000.0;
        assert!((mean - 0.5).abs() < 4.0 * (1.0f64 / 12.0 / 1e5).sqrt());
    }
}

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

/// A ChaCha20 stream keyed by `SHA-256(seed_le || label)`.
///
/// Every (seed, label) pair names its own stream, so concurrent cells never
/// share generator state and adding a new consumer does not shift anyone
/// else's draws.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha20Rng,
}

pub fn derive_stream(seed: u64, label: &str) -> RandomStream {
    RandomStream::derive(seed, label)
}

impl RandomStream {
    pub fn derive(seed: u64, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        RandomStream {
            rng: ChaCha20Rng::from_seed(key),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random mantissa bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform integer in `[0, n)`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }

    /// `k` distinct indices from `[0, n)`, returned sorted.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        if k < n {
            // partial Fisher-Yates
            for i in 0..k {
                let j = i + self.below(n - i);
                idx.swap(i, j);
            }
            idx.truncate(k);
        }
        idx.sort_unstable();
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_label_repeat() {
        let mut a = derive_stream(42, "a");
        let mut b = derive_stream(42, "a");
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn labels_separate_streams() {
        let mut a = derive_stream(42, "a");
        let mut b = derive_stream(42, "b");
        assert_ne!(a.next_u64(), b.next_u64());
        let mut c = derive_stream(43, "a");
        assert_ne!(derive_stream(42, "a").next_u64(), c.next_u64());
    }

    // Key = SHA-256(42u64 LE || "a"); first 8 bytes of the ChaCha20 keystream
    // (zero nonce, zero counter) computed with an independent ChaCha20
    // implementation.
    #[test]
    fn first_draw_matches_reference_keystream() {
        let mut s = derive_stream(42, "a");
        assert_eq!(s.next_u64(), 0x6e60_82cf_8edf_d636);
        let mut s = derive_stream(42, "a");
        assert_eq!(s.uniform(), 0.431_160_140_679_707_4);
        let mut s = derive_stream(0, "");
        assert_eq!(s.next_u64(), 0xa086_dbd2_4abe_8f13);
    }

    #[test]
    fn uniform_in_unit_interval_and_shuffle_is_permutation() {
        let mut s = derive_stream(1, "u");
        for _ in 0..1000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
        let mut v: Vec<usize> = (0..50).collect();
        s.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        let picked = s.sample_indices(50, 10);
        assert_eq!(picked.len(), 10);
        assert!(picked.windows(2).all(|w| w[0] < w[1]));
    }
}

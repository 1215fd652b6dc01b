//! Small deterministic PRNG and the seeded permutation used by construction.
//!
//! The shuffle is pinned so that runs are reproducible across platforms and
//! ports: Fisher-Yates driven by SplitMix64, with bounded draws taken by
//! rejection sampling on the plain modulus. The identifier below is echoed
//! into stats output so other implementations can replay permutations.

/// Identifier of the permutation algorithm, echoed in stats records.
pub const SHUFFLE_ALGORITHM: &str = "fisher-yates/splitmix64/v1";

/// SplitMix64: the 64-bit mixer of Steele, Lea, and Flood. Deterministic and
/// trivially portable.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, bound)` by modulus with rejection of the biased
    /// tail.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }

    /// Uniform f64 in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Seeded Fisher-Yates permutation of `0..n`.
pub fn shuffled_ids(n: usize, seed: u64) -> Vec<u32> {
    let mut ids: Vec<u32> = (0..n as u32).collect();
    let mut rng = SplitMix64::new(seed);
    for i in (1..n).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        ids.swap(i, j);
    }
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_is_a_permutation() {
        let ids = shuffled_ids(100, 42);
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn shuffle_is_deterministic() {
        assert_eq!(shuffled_ids(50, 7), shuffled_ids(50, 7));
        assert_ne!(shuffled_ids(50, 7), shuffled_ids(50, 8));
    }

    #[test]
    fn next_below_stays_in_range() {
        let mut rng = SplitMix64::new(1);
        for _ in 0..1000 {
            assert!(rng.next_below(13) < 13);
        }
    }
}

//! Counter-based randomness.
//!
//! Every random quantity in the crate is a pure function of a 64-bit seed and a small tuple of
//! counters, so any edge liveness bit or vertex rank can be recomputed in isolation and parallel
//! construction is schedule independent.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of `(seed, stream, a, b)`.
#[inline]
pub fn keyed(seed: u64, stream: u64, a: u64, b: u64) -> u64 {
    let k = mix64(seed ^ stream.wrapping_mul(GOLDEN));
    let k = mix64(k ^ a.wrapping_add(GOLDEN));
    mix64(k ^ b.wrapping_mul(0xD6E8_FEB8_6659_FD93).wrapping_add(1))
}

/// Uniform double in `[0, 1)` from the top 53 bits of `h`.
#[inline]
pub fn unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

const MASK52: u64 = (1 << 52) - 1;

/// Keyed bijection on `[0, 2^52)`.
///
/// Alternating xor-shift and odd multiplication modulo `2^52`, with key material injected
/// between rounds. Each step is invertible, so distinct inputs give distinct outputs.
pub fn permute52(key: u64, x: u64) -> u64 {
    debug_assert!(x <= MASK52);
    let k1 = mix64(key) & MASK52;
    let k2 = mix64(key ^ GOLDEN) & MASK52;
    let k3 = mix64(key.wrapping_add(GOLDEN)) & MASK52;
    let mut z = x ^ k1;
    z = (z ^ (z >> 26)).wrapping_mul(0xB_F584_76D1_CE4F | 1) & MASK52;
    z ^= k2;
    z = (z ^ (z >> 23)).wrapping_mul(0x4_D049_BB13_3111 | 1) & MASK52;
    z ^= k3;
    z = (z ^ (z >> 27)).wrapping_mul(0x7_2F2A_5D0A_6C93 | 1) & MASK52;
    z ^ (z >> 25)
}

/// Distinct values in the open interval `(0, 1)` for distinct `x < 2^52`: `(2·π(x) + 1) / 2^53`.
#[inline]
pub fn open_unit_distinct(key: u64, x: u64) -> f64 {
    let p = permute52(key, x);
    (2 * p + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Order-independent hash of a vertex set (sorted before folding).
pub fn set_hash(seed: u64, items: &[usize]) -> u64 {
    let mut sorted: Vec<usize> = items.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut h = mix64(seed ^ 0x5EED_5E75);
    for &x in &sorted {
        h = mix64(h ^ (x as u64).wrapping_mul(GOLDEN));
    }
    mix64(h ^ sorted.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn permute52_is_injective_on_a_window() {
        let mut seen = HashSet::new();
        for x in 0..200_000u64 {
            assert!(seen.insert(permute52(42, x)));
        }
        let mut seen = HashSet::new();
        for x in (MASK52 - 50_000)..=MASK52 {
            assert!(seen.insert(permute52(7, x)));
        }
    }

    #[test]
    fn open_unit_stays_inside() {
        for x in 0..10_000u64 {
            let r = open_unit_distinct(3, x);
            assert!(r > 0.0 && r < 1.0);
        }
        assert!(open_unit_distinct(0, MASK52) < 1.0);
    }

    #[test]
    fn set_hash_ignores_order() {
        assert_eq!(set_hash(1, &[3, 1, 2]), set_hash(1, &[2, 3, 1]));
        assert_ne!(set_hash(1, &[1, 2]), set_hash(1, &[1, 3]));
    }
}

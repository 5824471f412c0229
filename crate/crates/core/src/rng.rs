//! Counter-based SplitMix64 stream.
//!
//! Value `k` of the stream for `seed` is
//! `mix(seed + (k + 1) * 0x9E3779B97F4A7C15)` with wrapping arithmetic, where
//! `mix(z)` applies `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
//! z *= 0x94D049BB133111EB; z ^= z >> 31`. A uniform double in `[0, 1)` is
//! `(value >> 11) * 2^-53`. Because each value depends only on `(seed, k)`,
//! the stream is trivial to reproduce in other languages.

use crate::field::Field;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_add(1).wrapping_mul(GOLDEN));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn uniform(seed: u64, k: u64) -> f64 {
    (splitmix64(seed, k) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Fills the active points with uniform values in `[0, 1)`, numbering the
/// points in storage order (x fastest).
pub fn fill_uniform(field: &mut Field, seed: u64) {
    let mut vals = Vec::with_capacity(field.active_count());
    let mut k = 0u64;
    field.for_each_active(|i, j, l| {
        vals.push((i, j, l, uniform(seed, k)));
        k += 1;
    });
    for (i, j, l, v) in vals {
        field.set(i, j, l, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // first outputs of the reference SplitMix64 generator seeded with 0
        assert_eq!(splitmix64(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0, 1), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(splitmix64(0, 2), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn uniform_range() {
        for k in 0..1000 {
            let u = uniform(42, k);
            assert!((0.0..1.0).contains(&u));
        }
    }
}

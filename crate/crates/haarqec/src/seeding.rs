//! Deterministic seed derivation and random number stream construction.
//!
//! Every source of randomness in the crate flows through this module: a
//! 64-bit seed is expanded by SplitMix64 into a ChaCha key, and batch
//! workloads derive one independent seed per task ordinal with
//! [`task_seed`]. Because the derivation is a pure function of
//! `(master_seed, ordinal)`, results are independent of scheduling and
//! worker count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// One step of the SplitMix64 output function.
#[inline]
pub fn split_mix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based per-task seed: `mix(master + (ordinal + 1) * phi64)` with a
/// second mixing round. Distinct ordinals give independent streams without
/// any sequential state.
#[inline]
pub fn task_seed(master_seed: u64, ordinal: u64) -> u64 {
    let bump = 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(ordinal.wrapping_add(1));
    split_mix64(split_mix64(master_seed.wrapping_add(bump)))
}

/// Deterministic generator for a given seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian with mean zero and total variance `variance`
/// (`variance / 2` in each of the real and imaginary parts).
#[inline]
pub fn complex_gaussian(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sigma * re, sigma * im)
}

/// Haar-uniform unit vector of dimension `dim` (normalized complex Gaussian).
pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    loop {
        let mut v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng, 1.0)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for z in v.iter_mut() {
                *z /= norm;
            }
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen values: sweep output reproducibility depends on this mixing
    // function never changing.
    #[test]
    fn task_seed_is_frozen() {
        assert_eq!(task_seed(0, 0), 0x46b7_3e79_f0c3_7c00);
        assert_eq!(task_seed(42, 7), 0x0c42_92e2_21dc_4866);
        assert_eq!(task_seed(u64::MAX, 12345), 0x07e1_5dc6_3e5c_519d);
    }

    #[test]
    fn task_seeds_differ_across_ordinals() {
        let seeds: Vec<u64> = (0..1000).map(|i| task_seed(99, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
    }

    #[test]
    fn unit_vectors_are_normalized_and_deterministic() {
        let mut rng = rng_from_seed(5);
        let v = random_unit_vector(&mut rng, 17);
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);

        let mut rng2 = rng_from_seed(5);
        let w = random_unit_vector(&mut rng2, 17);
        assert_eq!(v, w);
    }
}

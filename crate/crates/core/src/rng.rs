//! Seeded randomness shared by every sampler and experiment.
//!
//! All randomness in the crate flows from [`SeededRng`], which is ChaCha8
//! (rand_chacha) keyed from a 64-bit seed via `SeedableRng::seed_from_u64`.
//! ChaCha8's output stream is specified independently of the host, so raw
//! draws are bit-identical on every platform; floating-point transforms
//! applied on top (log, sin, cos) may differ in the last ulp across libms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The repo-wide generator.
pub type SeededRng = ChaCha8Rng;

/// Creates the repo-wide generator from a 64-bit seed.
pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// 64-bit FNV-1a hash of a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// SplitMix64 finalizer (Stafford variant 13).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of one trial from the master seed.
///
/// The experiment id is hashed with FNV-1a; the four words are then absorbed
/// one at a time as `state = mix64(state + GOLDEN_GAMMA + word)`, starting from
/// `state = master`. Identical tuples always map to identical seeds.
pub fn derive_trial_seed(master: u64, experiment: &str, m: u64, trial: u64) -> u64 {
    [fnv1a64(experiment.as_bytes()), m, trial]
        .iter()
        .fold(mix64(master.wrapping_add(GOLDEN_GAMMA)), |state, &word| {
            mix64(state.wrapping_add(GOLDEN_GAMMA).wrapping_add(word))
        })
}

/// Standard normal variates by the Box–Muller transform.
///
/// Each pair of uniforms yields two normals; the second is cached and
/// returned by the next call.
#[derive(Debug, Default, Clone)]
pub struct BoxMuller {
    spare: Option<f64>,
}

impl BoxMuller {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - rng.gen::<f64>();
        let u2 = rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;
    use std::collections::HashSet;

    #[test]
    fn golden_raw_output() {
        let mut rng = seeded(1);
        let got: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        assert_eq!(got, GOLDEN_SEED_1);
    }

    // Frozen from the first run; a change here means every stored record changes.
    const GOLDEN_SEED_1: [u64; 3] = [
        7424550030962593201,
        1482817706323250795,
        11004592982271133285,
    ];

    #[test]
    fn trial_seed_is_a_function_of_the_tuple() {
        assert_eq!(
            derive_trial_seed(1, "a", 10, 3),
            derive_trial_seed(1, "a", 10, 3)
        );
        assert_ne!(
            derive_trial_seed(1, "a", 10, 3),
            derive_trial_seed(1, "b", 10, 3)
        );
        assert_ne!(
            derive_trial_seed(1, "a", 10, 3),
            derive_trial_seed(2, "a", 10, 3)
        );
        assert_ne!(
            derive_trial_seed(1, "a", 10, 3),
            derive_trial_seed(1, "a", 11, 3)
        );
    }

    #[test]
    fn no_collisions_over_a_million_tuples() {
        let mut seen = HashSet::with_capacity(1 << 21);
        for trial in 0..500_000u64 {
            assert!(seen.insert(derive_trial_seed(1, "exp-a", 1000, trial)));
            assert!(seen.insert(derive_trial_seed(1, "exp-b", 1000, trial)));
        }
        assert_eq!(seen.len(), 1_000_000);
    }

    #[test]
    fn box_muller_moments() {
        let mut rng = seeded(7);
        let mut bm = BoxMuller::new();
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| bm.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        // 4 standard errors
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
    }
}

//! Seed derivation and the small weighted samplers shared by the augmenters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator used everywhere randomness is needed.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of stream identifiers (epoch, purpose,
/// node id, ...) into an independent child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn derive_rng(master: u64, path: &[u64]) -> SeededRng {
    rng_from_seed(derive_seed(master, path))
}

/// Draws an index with probability proportional to `weights`.
/// Returns `None` when no weight is positive.
pub fn weighted_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    last_positive
}

/// Successive weighted draws without replacement.
///
/// Each draw is proportional to the weights of the items not yet taken.
/// Once every remaining weight is zero the rest are drawn uniformly.
pub fn sample_without_replacement<R: Rng + ?Sized>(
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    let count = count.min(weights.len());
    let mut remaining: Vec<f64> = weights.iter().map(|&w| w.max(0.0)).collect();
    let mut taken = vec![false; weights.len()];
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let i = match weighted_index(&remaining, rng) {
            Some(i) => i,
            None => {
                let free: Vec<usize> = (0..weights.len()).filter(|&i| !taken[i]).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        taken[i] = true;
        remaining[i] = 0.0;
        picked.push(i);
    }
    picked
}

//! Phase sampling shared by the averaged quantities.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arithmetic::Frequency;
use crate::potential::{frac, PotentialSpec};

/// Stratified phases: the midpoints of `count` equal cells, or, with a seed,
/// one uniform draw per cell.
pub fn stratified(count: usize, seed: Option<u64>) -> Vec<f64> {
    let h = 1.0 / count as f64;
    match seed {
        None => (0..count).map(|i| (i as f64 + 0.5) * h).collect(),
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..count).map(|i| (i as f64 + rng.gen::<f64>()) * h).collect()
        }
    }
}

/// First orbit site `x + l alpha`, `l in start..start+n`, inside the
/// singularity guard.
pub fn singular_site(x: f64, start: i64, n: usize, alpha: &Frequency, potential: &PotentialSpec) -> Option<usize> {
    alpha
        .orbit(x, start, n)
        .iter()
        .position(|&t| potential.is_near_singularity(t))
}

/// Shift `x` by `10 * guard` until the `n`-step orbit avoids the guard.
/// Returns the usable phase and the number of shifts.
pub fn resolve(x: f64, n: usize, alpha: &Frequency, potential: &PotentialSpec) -> (f64, usize) {
    let mut x = frac(x);
    let mut shifts = 0;
    while singular_site(x, 0, n, alpha, potential).is_some() {
        x = frac(x + 10.0 * potential.singularity_guard);
        shifts += 1;
    }
    (x, shifts)
}

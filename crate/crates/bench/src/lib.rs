//! Seeded inputs shared by the benchmarks.

use fcm_core::{Fcm, HedgeTable};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n`-node map with edge density `density` and weights on hedge-bin
/// midpoints, so it survives the deterministic codec unchanged.
pub fn midpoint_map(n: usize, density: f64, seed: u64) -> Fcm {
    let mids: Vec<f64> = HedgeTable::default().bins().iter().map(|b| b.midpoint).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<String> = (0..n).map(|i| format!("Concept {i}")).collect();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(density) {
                let w = mids[rng.gen_range(0..mids.len())];
                m[[i, j]] = if rng.gen_bool(0.5) { w } else { -w };
            }
        }
    }
    Fcm::new(&labels, m).expect("valid map")
}

//! Synthetic inputs shared by the benchmarks.

use biasshift_core::{ScoreTable, SplitTag};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// `n` draws from N(mean, 1).
pub fn normal_sample(n: usize, mean: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(mean, 1.0).expect("unit sd");
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

/// Table with `attributes` columns of `n` normal logits, column j centred
/// at `offset + 0.5 * j`.
pub fn score_table(n: usize, attributes: usize, offset: f64, seed: u64) -> ScoreTable {
    let names = (0..attributes).map(|j| format!("attr{j}")).collect();
    let columns = (0..attributes)
        .map(|j| normal_sample(n, offset + 0.5 * j as f64, seed + j as u64))
        .collect();
    ScoreTable::new(SplitTag::Val, names, columns, None).expect("valid table")
}

//! Shared fixtures for the criterion benches.

use htree_core::synth::{generate, SynthConfig};
use htree_core::tabular::{fit_standardizer, transform, Matrix};
use htree_core::Dataset;

/// Planted eight-persona dataset with `rows` rows.
pub fn planted(rows: usize, seed: u64) -> Dataset {
    generate(&SynthConfig {
        rows,
        seed,
        base_rate: 0.1,
        ..SynthConfig::default()
    })
    .expect("valid synth config")
    .data
}

/// Standardized feature rows and labels of [`planted`].
pub fn standardized(rows: usize, seed: u64) -> (Matrix, Vec<u8>) {
    let data = planted(rows, seed);
    let stats = fit_standardizer(&data).expect("non-empty");
    (transform(&data, &stats).expect("matching dims"), data.labels)
}

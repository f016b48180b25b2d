//! Shared inputs for the benchmarks.

use kmboot_core::simlab::{generate, DataModel, Law};
use kmboot_core::ObservedSample;

/// `T ~ U(0, 1)` censored by `C ~ U(0, 2)`.
pub fn censored_uniform(n: usize, seed: u64) -> ObservedSample {
    let model = DataModel::new(
        Law::Uniform { a: 0.0, b: 1.0 },
        Some(Law::Uniform { a: 0.0, b: 2.0 }),
    )
    .expect("valid model");
    generate(&model, n, seed).expect("n >= 1")
}

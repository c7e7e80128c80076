//! Fixtures shared by the benchmarks.

use resilience_core::arma::{self, ArmaParams};
use resilience_core::{IncrementSeries, LevelSeries};

/// Increments of an ARMA(1,0) with β = −0.5, g = 10, σ = 50.
pub fn anti_persistent_increments(n: usize, seed: u64) -> IncrementSeries {
    let params = ArmaParams::new(10.0, vec![-0.5], vec![], 50.0);
    arma::simulate(&params, params.spec(), n, seed).expect("valid parameters")
}

/// Level path with `n` points integrated from [`anti_persistent_increments`].
pub fn anti_persistent_levels(n: usize, seed: u64) -> LevelSeries {
    anti_persistent_increments(n - 1, seed)
        .integrate(2000.0)
        .expect("finite increments")
}

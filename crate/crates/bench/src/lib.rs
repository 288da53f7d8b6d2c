//! Fixtures shared by the benchmarks.

use volterra_core::{verify, ChainState};

/// Periods exercised by every benchmark group.
pub const PERIODS: [usize; 4] = [3, 4, 6, 8];

/// A fixed random chain of period `n`.
pub fn fixture(n: usize) -> ChainState {
    verify::random_chain(0xB0 + n as u64, n).expect("periods >= 2 are valid")
}

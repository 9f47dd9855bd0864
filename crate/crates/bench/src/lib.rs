//! Shared inputs for the criterion benches.

use gnlab::spectral::{Field, Grid};
use gnlab::testfuncs::random_band_limited;

/// Random real field filling every resolved shell of an N^n grid of side 2π·4.
pub fn random_field(n: usize, points: usize, seed: u64) -> Field {
    let grid = Grid::new(n, points, 8.0 * std::f64::consts::PI).expect("bench grid");
    let (lo, hi) = grid.shell_range();
    random_band_limited(&grid, lo, hi, seed).expect("bench field")
}

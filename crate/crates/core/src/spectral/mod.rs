//! Periodic grids, unitary FFTs and Littlewood-Paley multipliers.

mod cutoff;
mod fft;
mod field;
mod grid;
pub mod io;
mod ops;

pub use cutoff::{partition_check, CutoffProfile, PartitionReport};
pub use field::{Direction, Domain, Field};
pub use grid::{make_grid, Grid};
pub use ops::{
    apply_symbol, band_limit, dilate, dyadic_project, embed, inhomog_project, radial_multiplier,
    riesz_constant, zero_mode_fraction, Symbol,
};

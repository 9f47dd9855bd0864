//! Numerical lab for fractional Gagliardo-Nirenberg inequalities.

pub mod error;
pub mod param_checker;
pub mod harness;
pub mod norms;
pub mod spectral;
pub mod testfuncs;
pub mod variational;

mod sum;

pub use error::{GnError, Result};

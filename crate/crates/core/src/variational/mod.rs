//! Constrained minimization of the generalized boson-star energy
//!
//! E(u) = ½ Σ ‖(m² + |ξ|²)^{s/2} û_i‖² − ∫∫ G(u(x)) V(x−y) G(u(y)),  V = |x|^{−(n−β)},
//!
//! over ‖u_i‖₂² = c_i on a periodic grid. Convolutions with V go through
//! the Fourier multiplier c(n,β)|ξ|^{−β} with the zero mode dropped.

mod cstar;
mod energy;
mod minimize;
mod regime;

pub use cstar::{estimate_cstar, with_mass, scaling_profile, CStarEstimate, CStarOptions, Quotient, ScalingProfile};
pub use energy::{
    energy, energy_gradient, gaussian_start, project_spheres, radial_monotonicity_defect, radial_order, schwarz_rearrange,
    upsilon_beta, upsilon_density, EnergyParams, EnergyReport, MultiField, NonlinearityG, Operators,
};
pub use minimize::{minimize, MinimizeOptions, MinimizeResult};
pub use regime::{g_conditions_check, on_critical_line, regime_classify, GConditionsReport, Regime, RegimeQuery, RegimeReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::{evaluate, project_spheres, schwarz_rearrange, EnergyParams, MultiField, Operators};
use crate::error::{invalid, GnError, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Stop once the relative energy decrease over `window` iterations drops below this.
    pub tol: f64,
    pub window: usize,
    /// Shift κ of the preconditioner (κ + m² − Δ)^{−s}.
    pub kappa: f64,
    pub rearrange: bool,
    /// Rearrangement is no longer tried once the per-step relative decrease is below this.
    pub rearrange_cutoff: f64,
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iters: 3000,
            tol: 1e-11,
            window: 10,
            kappa: 1.0,
            rearrange: true,
            rearrange_cutoff: 1e-7,
            armijo: 1e-4,
            max_halvings: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub u_final: MultiField,
    pub energy_trace: Vec<f64>,
    /// Lagrange multipliers r_i of (m²−Δ)^s u_i − 2(V∗G)∂_iG + r_i u_i = 0.
    pub multipliers: Vec<f64>,
    /// max_i ‖g_i + r_i u_i‖₂ / ‖u_i‖₂.
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rearrangements: usize,
}

impl MinimizeResult {
    pub fn final_energy(&self) -> f64 {
        *self.energy_trace.last().expect("trace starts with the initial energy")
    }
}

fn dot(a: &[f64], b: &[f64], w: f64) -> f64 {
    crate::sum::ordered_sum(a.len(), |i| a[i] * b[i]) * w
}

struct Tangent {
    direction: Vec<Vec<f64>>,
    multipliers: Vec<f64>,
    residuals: Vec<f64>,
    /// Σ⟨g̃, P g̃⟩
    slope: f64,
}

fn tangent(u: &MultiField, grad: &[Vec<f64>], pre: &Operators) -> Tangent {
    let grid = u.grid();
    let w = grid.cell_volume();
    let mut direction = Vec::with_capacity(u.len());
    let mut multipliers = Vec::with_capacity(u.len());
    let mut residuals = Vec::with_capacity(u.len());
    let mut slope = 0.0;
    for (i, g) in grad.iter().enumerate() {
        let ui = u.values(i);
        let uu = dot(&ui, &ui, w);
        let r = -dot(g, &ui, w) / uu;
        let gt: Vec<f64> = g.par_iter().zip(&ui).map(|(a, b)| a + r * b).collect();
        let spec = super::energy::real_field(&grid, &gt).to_fourier();
        let pg = pre.apply_kinetic(&spec);
        slope += dot(&gt, &pg, w);
        residuals.push((dot(&gt, &gt, w) / uu).sqrt());
        multipliers.push(r);
        direction.push(pg);
    }
    Tangent { direction, multipliers, residuals, slope }
}

fn step(u: &MultiField, dir: &[Vec<f64>], tau: f64) -> Result<MultiField> {
    let vals = (0..u.len())
        .map(|i| {
            u.values(i)
                .par_iter()
                .zip(&dir[i])
                .map(|(a, d)| (a - tau * d).max(0.0))
                .collect()
        })
        .collect();
    project_spheres(&u.from_values(vals))
}

/// Preconditioned projected gradient descent on the product of mass spheres.
pub fn minimize(u0: &MultiField, params: &EnergyParams, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    if u0.len() > 8 {
        return invalid("at most 8 components are supported");
    }
    params.validate(u0.grid().n, u0.len())?;
    if !(opts.tol > 0.0) || opts.window == 0 || !(opts.kappa > 0.0) {
        return invalid("tol, window and kappa must be positive");
    }
    let grid = u0.grid();
    let ops = Operators::for_params(&grid, params)?;
    let pre = Operators::new(&grid, -params.s, params.m2 + opts.kappa, params.beta)?;

    let clamped = u0.from_values((0..u0.len()).map(|i| u0.values(i).iter().map(|v| v.max(0.0)).collect()).collect());
    let mut u = project_spheres(&clamped)?;
    let mut ev = evaluate(&u, params, &ops, true)?;
    let mut trace = vec![ev.report.total];
    let mut rearrange = opts.rearrange;
    let mut rearrangements = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        let e = ev.report.total;
        let grad = ev.gradient.take().expect("gradient requested");
        let t = tangent(&u, &grad, &pre);
        let mut tau = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let cand = step(&u, &t.direction, tau)?;
            match evaluate(&cand, params, &ops, false) {
                Ok(c) if c.report.total <= e - opts.armijo * tau * t.slope => {
                    accepted = Some(cand);
                    break;
                }
                Ok(_) | Err(GnError::Numerical(_)) => tau *= 0.5,
                Err(err) => return Err(err),
            }
        }
        let Some(mut next) = accepted else {
            // No descent left at round-off level.
            converged = true;
            ev = evaluate(&u, params, &ops, true)?;
            break;
        };
        let mut next_ev = evaluate(&next, params, &ops, true)?;
        let rel = (e - next_ev.report.total) / e.abs().max(1e-300);
        if rearrange && rel < opts.rearrange_cutoff {
            rearrange = false;
        }
        if rearrange {
            let r = MultiField {
                components: next.components.iter().map(schwarz_rearrange).collect(),
                masses: next.masses.clone(),
            };
            let r = project_spheres(&r)?;
            let r_ev = evaluate(&r, params, &ops, true)?;
            if r_ev.report.total <= next_ev.report.total {
                next = r;
                next_ev = r_ev;
                rearrangements += 1;
            }
        }
        if !next_ev.report.total.is_finite() {
            return Err(GnError::Numerical(format!("energy became {} at iteration {iterations}", next_ev.report.total)));
        }
        u = next;
        ev = next_ev;
        trace.push(ev.report.total);
        if trace.len() > opts.window {
            let old = trace[trace.len() - 1 - opts.window];
            let now = ev.report.total;
            if (old - now) <= opts.tol * now.abs().max(1e-300) {
                converged = true;
                break;
            }
        }
    }

    let grad = ev.gradient.take().expect("gradient requested");
    let t = tangent(&u, &grad, &pre);
    let el_residual = t.residuals.iter().cloned().fold(0.0, f64::max);
    Ok(MinimizeResult {
        u_final: u,
        energy_trace: trace,
        multipliers: t.multipliers,
        el_residual,
        iterations,
        converged,
        rearrangements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use crate::variational::gaussian_start;
    use crate::variational::{energy, NonlinearityG};

    #[test]
    fn descends_and_keeps_mass() {
        let g = Grid::new(3, 32, 24.0).unwrap();
        let u0 = MultiField::single(gaussian_start(&g, 2.0).unwrap(), 1.0).unwrap();
        let p = EnergyParams::new(1.0, 0.0, 2.0, NonlinearityG::SumSquares);
        let r = minimize(&u0, &p, &MinimizeOptions { max_iters: 200, ..Default::default() }).unwrap();
        assert!(r.energy_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!((r.u_final.current_masses()[0] - 1.0).abs() < 1e-12);
        assert!(r.final_energy() < energy(&project_spheres(&u0).unwrap(), &p).unwrap().total);
        assert!(r.converged && r.el_residual < 1e-3);
        assert!(r.u_final.values(0).iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn two_components() {
        let g = Grid::new(3, 16, 16.0).unwrap();
        let f = gaussian_start(&g, 2.0).unwrap();
        let u0 = MultiField::new(vec![f.clone(), f], vec![1.0, 0.5]).unwrap();
        let p = EnergyParams::new(1.0, 1.0, 2.0, NonlinearityG::ProductPowers(vec![1.0, 1.0]));
        let r = minimize(&u0, &p, &MinimizeOptions { max_iters: 100, ..Default::default() }).unwrap();
        let m = r.u_final.current_masses();
        assert!((m[0] - 1.0).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
        assert!(r.energy_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

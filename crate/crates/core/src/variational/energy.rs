use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GnError, Result};
use crate::sum::ordered_sum;
use crate::spectral::{riesz_constant, Domain, Field, Grid};

/// L real nonnegative components on one grid with their target masses ‖u_i‖₂².
#[derive(Clone, Debug, PartialEq)]
pub struct MultiField {
    pub components: Vec<Field>,
    pub masses: Vec<f64>,
}

impl MultiField {
    pub fn new(components: Vec<Field>, masses: Vec<f64>) -> Result<MultiField> {
        if components.is_empty() {
            return invalid("a multi-field needs at least one component");
        }
        if components.len() != masses.len() {
            return invalid("one mass per component");
        }
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return invalid("masses must be positive");
        }
        let grid = components[0].grid;
        let components = components
            .into_iter()
            .map(|c| {
                if c.grid != grid {
                    return invalid("components live on different grids");
                }
                let mut p = c.into_domain(Domain::Physical);
                p.data.iter_mut().for_each(|v| v.im = 0.0);
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiField { components, masses })
    }

    pub fn single(field: Field, mass: f64) -> Result<MultiField> {
        MultiField::new(vec![field], vec![mass])
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn values(&self, i: usize) -> Vec<f64> {
        self.components[i].real_parts()
    }

    /// ‖u_i‖₂² for each component.
    pub fn current_masses(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.l2_norm().powi(2)).collect()
    }

    pub fn from_values(&self, values: Vec<Vec<f64>>) -> MultiField {
        let grid = self.grid();
        let components = values
            .into_iter()
            .map(|v| Field::from_real(grid, &v).expect("same grid size"))
            .collect();
        MultiField { components, masses: self.masses.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NonlinearityG {
    /// Π v_i^{α_i}
    ProductPowers(Vec<f64>),
    /// Σ |v_i|^μ
    SumPowers(f64),
    /// Σ v_i², so the interaction is Υ_β(u).
    SumSquares,
}

impl NonlinearityG {
    pub fn validate(&self, components: usize) -> Result<()> {
        match self {
            NonlinearityG::ProductPowers(a) => {
                if a.len() != components {
                    return invalid(format!("{} exponents for {components} components", a.len()));
                }
                if a.iter().any(|x| !(*x > 0.0)) {
                    return invalid("product exponents must be positive");
                }
            }
            NonlinearityG::SumPowers(mu) => {
                if !(*mu >= 2.0) {
                    return invalid(format!("power μ = {mu} must be at least 2"));
                }
            }
            NonlinearityG::SumSquares => {}
        }
        Ok(())
    }

    /// Exponent μ of the sum kinds.
    pub fn sum_power(&self) -> Option<f64> {
        match self {
            NonlinearityG::ProductPowers(_) => None,
            NonlinearityG::SumPowers(mu) => Some(*mu),
            NonlinearityG::SumSquares => Some(2.0),
        }
    }

    /// G(v) at one point; ProductPowers clamps negative entries to 0.
    pub fn eval(&self, v: &[f64]) -> f64 {
        match self {
            NonlinearityG::ProductPowers(a) => v.iter().zip(a).map(|(x, e)| x.max(0.0).powf(*e)).product(),
            NonlinearityG::SumPowers(mu) => v.iter().map(|x| x.abs().powf(*mu)).sum(),
            NonlinearityG::SumSquares => v.iter().map(|x| x * x).sum(),
        }
    }

    /// ∂_i G(v).
    pub fn partial(&self, v: &[f64], i: usize) -> f64 {
        match self {
            NonlinearityG::ProductPowers(a) => {
                let mut out = a[i] * v[i].max(0.0).powf(a[i] - 1.0);
                for (j, (x, e)) in v.iter().zip(a).enumerate() {
                    if j != i {
                        out *= x.max(0.0).powf(*e);
                    }
                }
                if v[i] <= 0.0 && a[i] < 1.0 {
                    0.0
                } else {
                    out
                }
            }
            NonlinearityG::SumPowers(mu) => mu * v[i].abs().powf(mu - 2.0) * v[i],
            NonlinearityG::SumSquares => 2.0 * v[i],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams {
    pub s: f64,
    pub m2: f64,
    pub beta: f64,
    pub g: NonlinearityG,
}

impl EnergyParams {
    pub fn new(s: f64, m2: f64, beta: f64, g: NonlinearityG) -> EnergyParams {
        EnergyParams { s, m2, beta, g }
    }

    pub fn validate(&self, n: usize, components: usize) -> Result<()> {
        if !(self.s > 0.0 && self.s.is_finite()) {
            return invalid(format!("s = {} must be positive", self.s));
        }
        if !(self.m2 >= 0.0 && self.m2.is_finite()) {
            return invalid(format!("m2 = {} must be nonnegative", self.m2));
        }
        if !(self.beta > 0.0 && self.beta < n as f64) {
            return invalid(format!("beta = {} must lie in (0, {n})", self.beta));
        }
        self.g.validate(components)
    }
}

/// Tabulated Fourier multipliers of one (grid, params) pair.
pub struct Operators {
    pub grid: Grid,
    /// (m² + |ξ|²)^s
    pub kinetic: Vec<f64>,
    /// c(n,β)|ξ|^{−β}, 0 at ξ = 0.
    pub kernel: Vec<f64>,
}

impl Operators {
    pub fn new(grid: &Grid, s: f64, m2: f64, beta: f64) -> Result<Operators> {
        let c = riesz_constant(grid.n, beta)?;
        let xi = grid.xi_norms();
        let kinetic = xi
            .par_iter()
            .map(|r| {
                let b = m2 + r * r;
                if b == 0.0 {
                    0.0
                } else {
                    b.powf(s)
                }
            })
            .collect();
        let kernel = xi.par_iter().map(|&r| if r == 0.0 { 0.0 } else { c * r.powf(-beta) }).collect();
        Ok(Operators { grid: *grid, kinetic, kernel })
    }

    pub fn for_params(grid: &Grid, params: &EnergyParams) -> Result<Operators> {
        Operators::new(grid, params.s, params.m2, params.beta)
    }

    /// ½ h^n Σ (m²+|ξ|²)^s |F u|² for a real array.
    pub fn quadratic(&self, spectrum: &Field) -> f64 {
        let s = ordered_sum(self.kinetic.len(), |i| self.kinetic[i] * spectrum.data[i].norm_sqr());
        0.5 * s * self.grid.cell_volume()
    }

    /// h^n Σ_{ξ≠0} c|ξ|^{−β}|F ρ|².
    pub fn interaction(&self, density_spectrum: &Field) -> f64 {
        let s = ordered_sum(self.kernel.len(), |i| self.kernel[i] * density_spectrum.data[i].norm_sqr());
        s * self.grid.cell_volume()
    }

    /// V ∗ ρ in physical space.
    pub fn potential(&self, density_spectrum: &Field) -> Vec<f64> {
        let mut f = density_spectrum.clone();
        f.data.par_iter_mut().zip(&self.kernel).for_each(|(c, k)| *c *= k);
        f.into_domain(Domain::Physical).real_parts()
    }

    pub fn apply_kinetic(&self, spectrum: &Field) -> Vec<f64> {
        let mut f = spectrum.clone();
        f.data.par_iter_mut().zip(&self.kinetic).for_each(|(c, k)| *c *= k);
        f.into_domain(Domain::Physical).real_parts()
    }
}

pub(crate) fn real_field(grid: &Grid, values: &[f64]) -> Field {
    Field::from_real(*grid, values).expect("grid-sized values")
}

/// Υ_β of a density ρ (not necessarily positive), zero mode dropped.
pub fn upsilon_density(rho: &Field, beta: f64) -> Result<f64> {
    let ops = Operators::new(&rho.grid, 1.0, 0.0, beta)?;
    Ok(ops.interaction(&rho.to_fourier()))
}

/// Υ_β(u) with |u|² = Σ u_i².
pub fn upsilon_beta(u: &MultiField, beta: f64) -> Result<f64> {
    let grid = u.grid();
    let vals: Vec<Vec<f64>> = (0..u.len()).map(|i| u.values(i)).collect();
    let rho: Vec<f64> = (0..grid.len()).map(|x| vals.iter().map(|v| v[x] * v[x]).sum()).collect();
    upsilon_density(&real_field(&grid, &rho), beta)
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub quadratic: f64,
    pub interaction: f64,
    pub total: f64,
    /// Some G input was negative and clamped to 0.
    pub clamped: bool,
}

pub(crate) struct Evaluation {
    pub report: EnergyReport,
    pub gradient: Option<Vec<Vec<f64>>>,
}

pub(crate) fn evaluate(u: &MultiField, params: &EnergyParams, ops: &Operators, want_gradient: bool) -> Result<Evaluation> {
    let grid = u.grid();
    let l = u.len();
    let vals: Vec<Vec<f64>> = (0..l).map(|i| u.values(i)).collect();
    let clamped = matches!(params.g, NonlinearityG::ProductPowers(_))
        && vals.iter().any(|v| v.iter().any(|x| *x < -1e-12));
    let spectra: Vec<Field> = u.components.iter().map(|c| c.to_fourier()).collect();
    let quadratic: f64 = spectra.iter().map(|s| ops.quadratic(s)).sum();
    let gfield: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|x| {
            let mut v = [0.0; 8];
            let point = point_values(&vals, x, &mut v);
            params.g.eval(point)
        })
        .collect();
    let gspec = real_field(&grid, &gfield).to_fourier();
    let interaction = ops.interaction(&gspec);
    let total = quadratic - interaction;
    if !total.is_finite() {
        return Err(GnError::Numerical(format!("energy is {total}")));
    }
    let gradient = if want_gradient {
        let pot = ops.potential(&gspec);
        let mut out = Vec::with_capacity(l);
        for (i, spec) in spectra.iter().enumerate() {
            let kin = ops.apply_kinetic(spec);
            let g: Vec<f64> = (0..grid.len())
                .into_par_iter()
                .map(|x| {
                    let mut v = [0.0; 8];
                    let point = point_values(&vals, x, &mut v);
                    kin[x] - 2.0 * pot[x] * params.g.partial(point, i)
                })
                .collect();
            out.push(g);
        }
        Some(out)
    } else {
        None
    };
    Ok(Evaluation { report: EnergyReport { quadratic, interaction, total, clamped }, gradient })
}

fn point_values<'a>(vals: &[Vec<f64>], x: usize, buf: &'a mut [f64; 8]) -> &'a [f64] {
    for (b, v) in buf.iter_mut().zip(vals) {
        *b = v[x];
    }
    &buf[..vals.len()]
}

fn check_components(u: &MultiField, params: &EnergyParams) -> Result<()> {
    if u.len() > 8 {
        return invalid("at most 8 components are supported");
    }
    params.validate(u.grid().n, u.len())
}

pub fn energy(u: &MultiField, params: &EnergyParams) -> Result<EnergyReport> {
    check_components(u, params)?;
    let ops = Operators::for_params(&u.grid(), params)?;
    Ok(evaluate(u, params, &ops, false)?.report)
}

/// L² gradient (m²−Δ)^s u_i − 2(V ∗ G(u)) ∂_iG(u).
pub fn energy_gradient(u: &MultiField, params: &EnergyParams) -> Result<MultiField> {
    check_components(u, params)?;
    let ops = Operators::for_params(&u.grid(), params)?;
    let g = evaluate(u, params, &ops, true)?.gradient.expect("requested");
    Ok(u.from_values(g))
}

/// e^{−|x|²/(2w²)} centred at the origin, nearest periodic image only.
pub fn gaussian_start(grid: &Grid, width: f64) -> Result<Field> {
    if !(width > 0.0 && width.is_finite()) {
        return invalid(format!("width {width} must be positive"));
    }
    Ok(Field::from_fn(*grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
    }))
}

/// Rescales u_i to mass c_i.
pub fn project_spheres(u: &MultiField) -> Result<MultiField> {
    let mut out = u.clone();
    for (c, &target) in out.components.iter_mut().zip(&u.masses) {
        let norm = c.l2_norm();
        if norm == 0.0 {
            return Err(GnError::Degenerate("zero component cannot reach its mass".into()));
        }
        c.scale(target.sqrt() / norm);
    }
    Ok(out)
}

/// Lattice points ordered by distance from the origin, ties by index.
pub fn radial_order(grid: &Grid) -> Vec<usize> {
    let r2 = grid.index_norms_sq();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.par_sort_by_key(|&i| (r2[i], i));
    order
}

/// Radially decreasing rearrangement of |f| on the grid. Points of one
/// lattice shell share the root mean square of the values ranked into it,
/// so the result is exactly radial and keeps the L² norm; placing the sorted
/// values one by one would leave angular jitter that costs kinetic energy.
pub fn schwarz_rearrange(field: &Field) -> Field {
    let grid = field.grid;
    let mut mags: Vec<f64> = field.to_physical().data.iter().map(|c| c.re.abs()).collect();
    mags.par_sort_by(|a, b| b.total_cmp(a));
    let order = radial_order(&grid);
    let r2 = grid.index_norms_sq();
    let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut start = 0;
    while start < order.len() {
        let shell = r2[order[start]];
        let end = start + order[start..].iter().take_while(|&&i| r2[i] == shell).count();
        let rms = (mags[start..end].iter().map(|v| v * v).sum::<f64>() / (end - start) as f64).sqrt();
        for &idx in &order[start..end] {
            data[idx] = Complex64::new(rms, 0.0);
        }
        start = end;
    }
    Field { grid, domain: Domain::Physical, data }
}

/// Max over lattice rays (axes and the main diagonal) of the largest
/// increase of the field moving outward; ≤ 0 means radially nonincreasing.
pub fn radial_monotonicity_defect(field: &Field) -> f64 {
    let grid = field.grid;
    let vals = field.to_physical().real_parts();
    let half = grid.points as i64 / 2;
    let mut dirs: Vec<[i64; 3]> = Vec::new();
    for a in 0..grid.n {
        for sign in [1, -1] {
            let mut d = [0i64; 3];
            d[a] = sign;
            dirs.push(d);
        }
    }
    let mut diag = [0i64; 3];
    for v in diag.iter_mut().take(grid.n) {
        *v = 1;
    }
    dirs.push(diag);
    let mut worst = f64::NEG_INFINITY;
    for d in dirs {
        let mut prev = None;
        for t in 0..half {
            let mut m = [0usize; 3];
            for a in 0..grid.n {
                m[a] = grid.unwrap_index(d[a] * t).expect("inside the box");
            }
            let v = vals[grid.linear_index(&m)];
            if let Some(p) = prev {
                worst = f64::max(worst, v - p);
            }
            prev = Some(v);
        }
    }
    worst
}

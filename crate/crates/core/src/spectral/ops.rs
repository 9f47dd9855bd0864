use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::{CutoffProfile, Domain, Field, Grid};
use crate::error::{invalid, GnError, Result};

/// Multiplies the Fourier coefficients by m(|ξ|) and returns the result in
/// the domain of the input.
pub fn radial_multiplier<M>(field: &Field, m: M) -> Field
where
    M: Fn(f64) -> f64 + Sync,
{
    let domain = field.domain;
    let mut f = field.to_fourier();
    let grid = f.grid;
    let d = grid.dxi();
    f.data.par_iter_mut().enumerate().for_each(|(idx, v)| {
        let w = grid.wrapped(idx);
        let r = d * ((w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) as f64).sqrt();
        *v *= m(r);
    });
    f.into_domain(domain)
}

/// Δ_k f, with multiplier φ(2^{−k}|ξ|).
pub fn dyadic_project(field: &Field, k: i32) -> Result<Field> {
    field.grid.check_shell(k)?;
    let c = CutoffProfile;
    Ok(radial_multiplier(field, |r| c.phi_k(k, r)))
}

/// Inhomogeneous block: ψ for k = 0, φ_k for k ≥ 1.
pub fn inhomog_project(field: &Field, k: i32) -> Result<Field> {
    let k_max = field.grid.k_max();
    if k < 0 || k > k_max {
        return Err(GnError::ShellOutOfRange { k, k_min: 0, k_max });
    }
    let c = CutoffProfile;
    Ok(radial_multiplier(field, |r| c.inhomog_k(k, r)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Symbol {
    /// |ξ|^s
    FracLaplacian(f64),
    /// (m² + |ξ|²)^{s/2}
    Bessel { s: f64, m2: f64 },
    /// c(n,β)|ξ|^{−β}, the symbol of convolution with |x|^{−(n−β)}.
    RieszPotential(f64),
}

/// c(n,β) = 2^β π^{n/2} Γ(β/2) / Γ((n−β)/2).
pub fn riesz_constant(n: usize, beta: f64) -> Result<f64> {
    let nf = n as f64;
    if !(beta > 0.0 && beta < nf) {
        return invalid(format!("beta = {beta} must lie in (0, {n})"));
    }
    Ok(2f64.powf(beta) * std::f64::consts::PI.powf(nf / 2.0) * gamma(beta / 2.0) / gamma((nf - beta) / 2.0))
}

impl Symbol {
    /// Symbol as a function of |ξ|; the ξ = 0 value of singular symbols is 0.
    pub fn evaluator(&self, n: usize) -> Result<Box<dyn Fn(f64) -> f64 + Sync + Send>> {
        match *self {
            Symbol::FracLaplacian(s) => Ok(Box::new(move |r: f64| {
                if r == 0.0 {
                    if s == 0.0 { 1.0 } else { 0.0 }
                } else {
                    r.powf(s)
                }
            })),
            Symbol::Bessel { s, m2 } => {
                if !(m2 >= 0.0) {
                    return invalid(format!("m2 = {m2} must be nonnegative"));
                }
                Ok(Box::new(move |r: f64| {
                    let base = m2 + r * r;
                    if base == 0.0 {
                        if s == 0.0 { 1.0 } else { 0.0 }
                    } else {
                        base.powf(s / 2.0)
                    }
                }))
            }
            Symbol::RieszPotential(beta) => {
                let c = riesz_constant(n, beta)?;
                Ok(Box::new(move |r: f64| if r == 0.0 { 0.0 } else { c * r.powf(-beta) }))
            }
        }
    }

    pub fn is_singular_at_zero(&self) -> bool {
        match *self {
            Symbol::FracLaplacian(s) => s < 0.0,
            Symbol::Bessel { s, m2 } => m2 == 0.0 && s < 0.0,
            Symbol::RieszPotential(_) => true,
        }
    }
}

pub fn apply_symbol(field: &Field, symbol: Symbol) -> Result<Field> {
    let eval = symbol.evaluator(field.grid.n)?;
    Ok(radial_multiplier(field, eval))
}

/// |F(0)| relative to (Σ|F|²)^{1/2}: how much mean a field carries.
pub fn zero_mode_fraction(field: &Field) -> f64 {
    let f = field.to_fourier();
    let total = f.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if total == 0.0 {
        0.0
    } else {
        f.data[0].norm() / total
    }
}

/// Zeroes every Fourier coefficient with some |w_a| ≥ N/(2·factor).
/// With factor = 2 products of two such fields are alias-free.
pub fn band_limit(field: &Field, factor: usize) -> Field {
    let domain = field.domain;
    let mut f = field.to_fourier();
    let grid = f.grid;
    let cut = (grid.points / (2 * factor)) as i64;
    f.data.par_iter_mut().enumerate().for_each(|(idx, v)| {
        let w = grid.wrapped(idx);
        if w[..grid.n].iter().any(|c| c.abs() >= cut) {
            *v = Complex64::new(0.0, 0.0);
        }
    });
    f.into_domain(domain)
}

/// Fraction of L² energy carried by coefficients with some |w_a| ≥ limit.
fn spectral_tail(grid: &Grid, spectrum: &[Complex64], limit: i64) -> f64 {
    let (tail, total) = spectrum
        .par_iter()
        .enumerate()
        .map(|(idx, c)| {
            let w = grid.wrapped(idx);
            let e = c.norm_sqr();
            let out = w[..grid.n].iter().any(|v| v.abs() >= limit);
            (if out { e } else { 0.0 }, e)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Fraction of L² mass with some |w_a| ≥ limit in physical space.
fn spatial_tail(grid: &Grid, values: &[Complex64], limit: i64) -> f64 {
    spectral_tail(grid, values, limit)
}

/// Returns g(x) = f(λx) for λ = 2^j on the same grid.
///
/// Contraction (j > 0) subsamples physical space and keeps one copy of f; it
/// needs f band-limited to |ξ_a| < ξ_Nyquist/λ. Dilation (j < 0) subsamples
/// the spectrum and needs f concentrated in the central 1/λ' of the box,
/// λ' = 2^{|j|}. Both are exact on band-limited, box-localised data; `tol`
/// bounds the discarded energy fraction.
pub fn dilate(field: &Field, j: i32, tol: f64) -> Result<Field> {
    let grid = field.grid;
    if j == 0 {
        return Ok(field.clone());
    }
    let factor = 1i64 << j.unsigned_abs();
    if factor as usize >= grid.points {
        return invalid(format!("dilation 2^{j} exceeds the grid"));
    }
    let half = grid.points as i64 / 2;
    let limit = half / factor;
    let domain = field.domain;
    if j > 0 {
        let spec = field.to_fourier();
        let tail = spectral_tail(&grid, &spec.data, limit);
        if tail > tol {
            return Err(GnError::InvalidParameter(format!(
                "contraction by 2^{j} pushes {tail:.3e} of the spectrum past Nyquist"
            )));
        }
        let phys = field.to_physical();
        let data = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let w = grid.wrapped(idx);
                let mut multi = [0usize; 3];
                for a in 0..grid.n {
                    match grid.unwrap_index(w[a] * factor) {
                        Some(i) => multi[a] = i,
                        None => return Complex64::new(0.0, 0.0),
                    }
                }
                phys.data[grid.linear_index(&multi)]
            })
            .collect();
        Ok(Field { grid, domain: Domain::Physical, data }.into_domain(domain))
    } else {
        let phys = field.to_physical();
        let tail = spatial_tail(&grid, &phys.data, limit);
        if tail > tol {
            return Err(GnError::InvalidParameter(format!(
                "dilation by 2^{j} leaves {tail:.3e} of the mass outside the box"
            )));
        }
        let spec = field.to_fourier();
        let amp = (factor as f64).powi(grid.n as i32);
        let data = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let w = grid.wrapped(idx);
                let mut multi = [0usize; 3];
                for a in 0..grid.n {
                    match grid.unwrap_index(w[a] * factor) {
                        Some(i) => multi[a] = i,
                        None => return Complex64::new(0.0, 0.0),
                    }
                }
                spec.data[grid.linear_index(&multi)] * amp
            })
            .collect();
        Ok(Field { grid, domain: Domain::Fourier, data }.into_domain(domain))
    }
}

/// Zero-pads the spectrum onto a finer grid with the same box; physical
/// values of band-limited data are unchanged.
pub fn embed(field: &Field, points: usize) -> Result<Field> {
    let src = field.grid;
    if points < src.points {
        return invalid("embedding needs at least as many points");
    }
    let grid = Grid::new(src.n, points, src.length)?;
    let spec = field.to_fourier();
    let mut out = Field::zeros(grid, Domain::Fourier);
    let amp = ((grid.len() as f64) / (src.len() as f64)).sqrt();
    for (idx, c) in spec.data.iter().enumerate() {
        let w = src.wrapped(idx);
        let mut multi = [0usize; 3];
        for a in 0..src.n {
            multi[a] = grid.unwrap_index(w[a]).expect("finer grid holds coarse lattice");
        }
        out.data[grid.linear_index(&multi)] = c * amp;
    }
    Ok(out.into_domain(field.domain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn plane_wave(grid: Grid, k: [f64; 3]) -> Field {
        Field::from_fn(grid, move |x| {
            let phase: f64 = x.iter().zip(k.iter()).map(|(a, b)| a * b).sum();
            Complex64::new(0.0, phase).exp()
        })
    }

    #[test]
    fn projection_flat_zone_and_far_shell() {
        let g = Grid::new(1, 1024, 2.0 * PI * 10.0).unwrap();
        let k = 3;
        let xi0 = 0.9 * 8.0;
        let f = plane_wave(g, [xi0, 0.0, 0.0]);
        let p = dyadic_project(&f, k).unwrap();
        assert!(f.max_rel_diff(&p) < 1e-12);
        let f = plane_wave(g, [64.0, 0.0, 0.0]);
        let p = dyadic_project(&f, k).unwrap();
        assert!(p.data.iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn projection_out_of_range() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = Field::zeros(g, Domain::Physical);
        match dyadic_project(&f, 20) {
            Err(GnError::ShellOutOfRange { k_min, k_max, .. }) => assert_eq!((k_min, k_max), (1, 4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn almost_orthogonality() {
        let g = Grid::new(2, 64, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new((x[0] * 3.0).sin() + (x[1] * 7.0).cos() + x[0].cos() * (x[1] * 2.0).sin(), 0.0));
        let (lo, hi) = g.shell_range();
        for j in lo..=hi {
            for k in lo..=hi {
                if (j - k).abs() >= 2 {
                    let p = dyadic_project(&dyadic_project(&f, j).unwrap(), k).unwrap();
                    assert!(p.data.iter().all(|c| c.norm() < 1e-13));
                }
            }
        }
    }

    #[test]
    fn sum_of_projections_recovers_band_limited_field() {
        let g = Grid::new(2, 64, 2.0 * PI).unwrap();
        let (lo, hi) = g.shell_range();
        let f = radial_multiplier(
            &Field::from_fn(g, |x| Complex64::new((x[0] * 5.0).sin() * (x[1] * 3.0).cos() + (x[0] * 3.0 + x[1] * 4.0).cos(), 0.0)),
            |r| if r >= 2f64.powi(lo) && r <= 2f64.powi(hi) { 1.0 } else { 0.0 },
        );
        let mut acc = Field::zeros(g, Domain::Physical);
        for k in lo..=hi {
            acc.add_scaled(&dyadic_project(&f, k).unwrap(), 1.0).unwrap();
        }
        assert!(f.max_rel_diff(&acc) < 1e-12);
    }

    #[test]
    fn symbols_on_plane_waves() {
        let g = Grid::new(3, 16, 2.0 * PI).unwrap();
        let k = [3.0, -1.0, 2.0];
        let r = (14.0f64).sqrt();
        let f = plane_wave(g, k);
        let out = apply_symbol(&f, Symbol::FracLaplacian(0.7)).unwrap();
        let mut expect = f.clone();
        expect.scale(r.powf(0.7));
        assert!(expect.max_rel_diff(&out) < 1e-12);
        let c = Field::from_fn(g, |_| Complex64::new(2.0, 0.0));
        let out = apply_symbol(&c, Symbol::Bessel { s: 1.5, m2: 4.0 }).unwrap();
        assert!((out.data[5].re - 2.0 * 2f64.powf(1.5)).abs() < 1e-12);
        assert!(apply_symbol(&c, Symbol::RieszPotential(3.0)).is_err());
        assert!(apply_symbol(&c, Symbol::Bessel { s: 1.0, m2: -1.0 }).is_err());
    }

    #[test]
    fn symbol_composition() {
        let g = Grid::new(2, 32, 5.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new((x[0] * 1.3).sin() * (-(x[1] * x[1])).exp(), 0.0));
        let f = radial_multiplier(&f, |r| if r == 0.0 { 0.0 } else { 1.0 });
        let a = apply_symbol(&apply_symbol(&f, Symbol::FracLaplacian(0.4)).unwrap(), Symbol::FracLaplacian(-1.1)).unwrap();
        let b = apply_symbol(&f, Symbol::FracLaplacian(-0.7)).unwrap();
        assert!(b.max_rel_diff(&a) < 1e-12);
    }

    #[test]
    fn riesz_constant_newton() {
        let c = riesz_constant(3, 2.0).unwrap();
        assert!((c - 4.0 * PI).abs() < 1e-12);
    }

    fn gaussian(g: Grid, w: f64) -> Field {
        Field::from_fn(g, move |x| Complex64::new((-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * w * w)).exp(), 0.0))
    }

    #[test]
    fn contraction_and_dilation_of_gaussian() {
        let g = Grid::new(2, 128, 40.0).unwrap();
        let f = gaussian(g, 1.6);
        let c = dilate(&f, 1, 1e-12).unwrap();
        assert!(gaussian(g, 0.8).max_rel_diff(&c) < 1e-10);
        let d = dilate(&f, -1, 1e-12).unwrap();
        assert!(gaussian(g, 3.2).max_rel_diff(&d) < 1e-8);
        assert!(dilate(&gaussian(g, 0.4), 2, 1e-12).is_err());
        assert!(dilate(&gaussian(g, 6.0), -2, 1e-12).is_err());
    }

    #[test]
    fn embed_preserves_values() {
        let g = Grid::new(2, 32, 20.0).unwrap();
        let f = gaussian(g, 2.0);
        let e = embed(&f, 64).unwrap();
        for idx in 0..g.len() {
            let m = g.multi_index(idx);
            let fine = e.grid.linear_index(&[2 * m[0], 2 * m[1]]);
            assert!((e.data[fine] - f.data[idx]).norm() < 1e-9);
        }
        assert!((e.l2_norm() - f.l2_norm()).abs() < 1e-9);
    }
}

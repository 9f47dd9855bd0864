//! Lacunary counterexample families and generic test fields.
//!
//! Bumps sit at ξ_j = (7·2^{j−3}, 0, …), rounded to the lattice, and must
//! fall inside the flat zone 3/4·2^j ≤ |ξ| ≤ 2^j of φ_j so that Δ_j sees the
//! whole bump and no other shell sees it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GnError, Result};
use crate::norms::{NormFamily, NormSpec};
use crate::spectral::{CutoffProfile, Domain, Field, Grid};

pub const DEFAULT_J0: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Σ 2^{εj} φ(2(ξ − ξ_j))
    EpsBumpTrain,
    /// Σ 2^{−sj−nλ(1/p−1)j} φ(2^{λj}(ξ − ξ_j))
    ScaledBumpTrain,
    /// Σ 2^{−sj+n(1/p−1)j} φ(2^{−j}ξ)
    EqualShellTrain,
    /// Σ 2^{−sj} φ(2(ξ − ξ_j))
    SingleAmplitudeTrain,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LacunaryFamily {
    pub kind: FamilyKind,
    pub n: usize,
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub s: f64,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default)]
    pub lambda: f64,
    /// Top shell of the train.
    pub index: i32,
    #[serde(default = "default_j0")]
    pub j0: i32,
}

fn one() -> f64 {
    1.0
}

fn default_j0() -> i32 {
    DEFAULT_J0
}

/// Predicted growth of a family's norms in its index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Asymptotic {
    /// ‖·‖_{Ḃ^σ_{r,q}} ∼ 2^{(σ+ε)N} for every (σ, r, q).
    Exponential { eps: f64 },
    /// ‖·‖ ∼ J^{1/q} in the q-indexed space with this (s, p), J the shell count.
    CountPower { s: f64, p: f64 },
}

impl Asymptotic {
    /// Slope of log₂‖·‖ on the family's natural axis (N, or log₂ J).
    pub fn log2_rate(&self, norm: &NormSpec) -> Option<f64> {
        match *self {
            Asymptotic::Exponential { eps } => match norm.family {
                NormFamily::HomogBesov | NormFamily::HomogTriebel => Some(norm.s + eps),
                _ => None,
            },
            Asymptotic::CountPower { s, p } => {
                let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
                if close(norm.s, s) && close(norm.p, p) {
                    Some(if norm.q.is_infinite() { 0.0 } else { 1.0 / norm.q })
                } else {
                    None
                }
            }
        }
    }
}

impl LacunaryFamily {
    fn base(kind: FamilyKind, n: usize, index: i32) -> LacunaryFamily {
        LacunaryFamily { kind, n, eps: 0.0, s: 0.0, p: 1.0, lambda: 0.0, index, j0: DEFAULT_J0 }
    }

    pub fn eps_bump(n: usize, eps: f64, index: i32) -> LacunaryFamily {
        LacunaryFamily { eps, ..Self::base(FamilyKind::EpsBumpTrain, n, index) }
    }

    pub fn scaled_bump(n: usize, s: f64, p: f64, lambda: f64, index: i32) -> LacunaryFamily {
        LacunaryFamily { s, p, lambda, ..Self::base(FamilyKind::ScaledBumpTrain, n, index) }
    }

    pub fn equal_shell(n: usize, s: f64, p: f64, index: i32) -> LacunaryFamily {
        LacunaryFamily { s, p, ..Self::base(FamilyKind::EqualShellTrain, n, index) }
    }

    pub fn single_amplitude(n: usize, s: f64, index: i32) -> LacunaryFamily {
        LacunaryFamily { s, ..Self::base(FamilyKind::SingleAmplitudeTrain, n, index) }
    }

    pub fn with_j0(mut self, j0: i32) -> LacunaryFamily {
        self.j0 = j0;
        self
    }

    pub fn with_index(mut self, index: i32) -> LacunaryFamily {
        self.index = index;
        self
    }

    pub fn shells(&self) -> std::ops::RangeInclusive<i32> {
        self.j0..=self.index
    }

    pub fn count(&self) -> i32 {
        self.index - self.j0 + 1
    }

    /// Amplitude trains are read against N, cardinality trains against log₂ J.
    pub fn uses_log_axis(&self) -> bool {
        !matches!(self.kind, FamilyKind::EpsBumpTrain)
    }

    pub fn axis_value(&self) -> f64 {
        if self.uses_log_axis() {
            (self.count() as f64).log2()
        } else {
            self.index as f64
        }
    }

    pub fn prediction(&self) -> Asymptotic {
        match self.kind {
            FamilyKind::EpsBumpTrain => Asymptotic::Exponential { eps: self.eps },
            _ => Asymptotic::CountPower { s: self.s, p: self.p },
        }
    }

    pub fn amplitude(&self, j: i32) -> f64 {
        let j = j as f64;
        let n = self.n as f64;
        let e = match self.kind {
            FamilyKind::EpsBumpTrain => self.eps * j,
            FamilyKind::ScaledBumpTrain => -self.s * j - n * self.lambda * (1.0 / self.p - 1.0) * j,
            FamilyKind::EqualShellTrain => -self.s * j + n * (1.0 / self.p - 1.0) * j,
            FamilyKind::SingleAmplitudeTrain => -self.s * j,
        };
        2f64.powf(e)
    }

    /// Argument scale a_j of the bump profile φ(a_j(ξ − ξ_j)).
    fn bump_scale(&self, j: i32) -> f64 {
        match self.kind {
            FamilyKind::ScaledBumpTrain => 2f64.powf(self.lambda * j as f64),
            _ => 2.0,
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        if self.n != grid.n {
            return invalid(format!("family dimension {} on a {}-d grid", self.n, grid.n));
        }
        if self.index < self.j0 {
            return invalid(format!("index {} below first shell {}", self.index, self.j0));
        }
        if !(self.p > 0.0) {
            return invalid("p must be positive");
        }
        if self.kind == FamilyKind::ScaledBumpTrain && self.lambda < 0.0 {
            return invalid("scaled bump trains need λ ≥ 0");
        }
        let (k_min, k_max) = grid.shell_range();
        if self.j0 < k_min {
            return Err(GnError::ShellOutOfRange { k: self.j0, k_min, k_max });
        }
        if self.index > k_max {
            return Err(GnError::ShellOutOfRange { k: self.index, k_min, k_max });
        }
        Ok(())
    }

    /// Fourier-domain field of the family on `grid`.
    pub fn build(&self, grid: &Grid) -> Result<Field> {
        self.validate(grid)?;
        let mut field = Field::zeros(*grid, Domain::Fourier);
        let scale = (grid.len() as f64).sqrt() / grid.volume();
        let d = grid.dxi();
        let c = CutoffProfile;
        for j in self.shells() {
            let amp = self.amplitude(j) * scale;
            if self.kind == FamilyKind::EqualShellTrain {
                field.data.par_iter_mut().enumerate().for_each(|(idx, v)| {
                    let w = grid.wrapped(idx);
                    let r = d * ((w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) as f64).sqrt();
                    *v += amp * c.phi_k(j, r);
                });
                continue;
            }
            let center = (7.0 * 2f64.powi(j - 3) / d).round() * d;
            let a = self.bump_scale(j);
            let radius = CutoffProfile::OUTER / a;
            let half = 2f64.powi(j - 3);
            if (center - 7.0 * half).abs() + radius > half + 1e-12 {
                return invalid(format!(
                    "bump at shell {j} (radius {radius:.3}) leaves the flat zone of φ_{j}"
                ));
            }
            let hits: usize = field
                .data
                .par_iter_mut()
                .enumerate()
                .map(|(idx, v)| {
                    let f = grid.frequency(idx);
                    let dist = ((f[0] - center).powi(2) + f[1] * f[1] + f[2] * f[2]).sqrt();
                    let val = c.phi(a * dist);
                    if val != 0.0 {
                        *v += amp * val;
                        1
                    } else {
                        0
                    }
                })
                .sum();
            if hits == 0 {
                return Err(GnError::Degenerate(format!(
                    "bump at shell {j} covers no lattice point; enlarge the box"
                )));
            }
        }
        Ok(field)
    }
}

/// e^{−|x−c|²/(2w²)}, summed over the nearest periodic images.
pub fn gaussian(grid: &Grid, width: f64, center: &[f64]) -> Result<Field> {
    let h = grid.spacing();
    if !(width >= 4.0 * h - 1e-12 && width <= grid.length / 8.0 + 1e-12) {
        return invalid(format!(
            "width {width} outside [{}, {}]",
            4.0 * h,
            grid.length / 8.0
        ));
    }
    if center.len() != grid.n {
        return invalid("center dimension does not match the grid");
    }
    let n = grid.n;
    let l = grid.length;
    let images: Vec<[f64; 3]> = (0..3usize.pow(n as u32))
        .map(|mut m| {
            let mut shift = [0.0; 3];
            for s in shift.iter_mut().take(n) {
                *s = ((m % 3) as f64 - 1.0) * l;
                m /= 3;
            }
            shift
        })
        .collect();
    let c = center.to_vec();
    Ok(Field::from_fn(*grid, move |x| {
        let mut acc = 0.0;
        for shift in &images {
            let r2: f64 = (0..n).map(|a| (x[a] - c[a] + shift[a]).powi(2)).sum();
            acc += (-r2 / (2.0 * width * width)).exp();
        }
        Complex64::new(acc, 0.0)
    }))
}

/// Real field with i.i.d. complex Gaussian coefficients on
/// 2^{k_lo} ≤ |ξ| ≤ 2^{k_hi}, symmetrized so that F(−ξ) = conj F(ξ).
pub fn random_band_limited(grid: &Grid, k_lo: i32, k_hi: i32, seed: u64) -> Result<Field> {
    let (k_min, k_max) = grid.shell_range();
    for k in [k_lo, k_hi] {
        if k < k_min || k > k_max {
            return Err(GnError::ShellOutOfRange { k, k_min, k_max });
        }
    }
    if k_lo > k_hi {
        return invalid(format!("empty shell range [{k_lo}, {k_hi}]"));
    }
    let lo = 2f64.powi(k_lo);
    let hi = 2f64.powi(k_hi);
    let xi = grid.xi_norms();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Complex64> = xi
        .iter()
        .map(|&r| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if r >= lo && r <= hi {
                Complex64::new(re, im)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let data: Vec<Complex64> = (0..grid.len())
        .map(|idx| {
            let w = grid.wrapped(idx);
            let mut m = [0usize; 3];
            for a in 0..grid.n {
                m[a] = (grid.points as i64 - w[a]).rem_euclid(grid.points as i64) as usize;
            }
            let mirror = grid.linear_index(&m);
            (raw[idx] + raw[mirror].conj()) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    if data.iter().all(|c| c.norm() == 0.0) {
        return Err(GnError::Degenerate(format!(
            "annulus 2^{k_lo} ≤ |ξ| ≤ 2^{k_hi} holds no lattice point"
        )));
    }
    Field::from_data(*grid, Domain::Fourier, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{besov_norm, lp_norm, triebel_norm};
    use crate::spectral::dyadic_project;
    use std::f64::consts::PI;

    #[test]
    fn eps_bumps_are_shell_disjoint() {
        let g = Grid::new(1, 1 << 12, 4.0 * PI).unwrap();
        let fam = LacunaryFamily::eps_bump(1, 0.5, 7);
        let f = fam.build(&g).unwrap();
        let base = lp_norm(&LacunaryFamily::eps_bump(1, 0.0, 3).build(&g).unwrap().to_physical(), 3.0).unwrap();
        let (lo, hi) = g.shell_range();
        for k in lo..=hi {
            let dk = dyadic_project(&f, k).unwrap().to_physical();
            let v = lp_norm(&dk, 3.0).unwrap();
            if fam.shells().contains(&k) {
                let expect = fam.amplitude(k) * base;
                assert!(((v - expect) / expect).abs() < 1e-6, "k={k}");
            } else {
                assert!(v < 1e-12 * base, "k={k} v={v}");
            }
        }
    }

    #[test]
    fn scaled_bump_dilation_identity() {
        // The profile's transform decays like exp(−c|x|^{1/2}), so the box
        // grows with the bump to keep the truncated tails comparable.
        let p = 4.0 / 3.0;
        let lambda = 0.25;
        let mut norms = vec![];
        for (j, len) in [(3, 256.0), (7, 512.0)] {
            let g = Grid::new(1, 1 << 16, len).unwrap();
            let fam = LacunaryFamily::scaled_bump(1, 0.0, 1.0, lambda, j).with_j0(j);
            norms.push(lp_norm(&fam.build(&g).unwrap().to_physical(), p).unwrap());
        }
        let expect = 2f64.powf(lambda * 4.0 * (1.0 / p - 1.0));
        assert!(((norms[1] / norms[0]) / expect - 1.0).abs() < 1e-6, "{norms:?} {expect}");
    }

    #[test]
    fn single_amplitude_one_term() {
        let g = Grid::new(1, 1 << 10, 8.0 * PI).unwrap();
        let f = LacunaryFamily::single_amplitude(1, 1.0, 3).build(&g).unwrap();
        let vals: Vec<f64> = [1.0, 2.0, f64::INFINITY]
            .iter()
            .map(|&q| besov_norm(&f, &NormSpec::besov(1.0, 2.0, q)).unwrap().value)
            .collect();
        assert!((vals[0] - vals[1]).abs() < 1e-10 * vals[0]);
        assert!((vals[0] - vals[2]).abs() < 1e-10 * vals[0]);
        let t = triebel_norm(&f, &NormSpec::triebel(1.0, 2.0, 1.0)).unwrap().value;
        assert!((vals[0] - t).abs() < 1e-10 * t);
    }

    #[test]
    fn family_range_errors() {
        let g = Grid::new(1, 256, 4.0 * PI).unwrap();
        let err = LacunaryFamily::eps_bump(1, 0.5, 12).build(&g).unwrap_err();
        assert!(matches!(err, GnError::ShellOutOfRange { k_max: 5, .. }));
        // λ too small for the bump to fit the flat zone at the first shell
        let g = Grid::new(1, 1 << 12, 64.0).unwrap();
        assert!(LacunaryFamily::scaled_bump(1, 0.0, 2.0, 0.0, 5).build(&g).is_err());
    }

    #[test]
    fn gaussian_norms_and_transform() {
        let g = Grid::new(2, 128, 40.0).unwrap();
        let w = 1.5;
        let f = gaussian(&g, w, &[0.0, 0.0]).unwrap();
        let v = lp_norm(&f, 2.0).unwrap();
        assert!((v - PI.powf(0.5) * w).abs() < 1e-8);
        let spec = f.to_fourier();
        let scale = Field::spectrum_scale(&g);
        for idx in (0..g.len()).step_by(97) {
            let xi = g.frequency(idx);
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            let expect = 2.0 * PI * w * w * (-r2 * w * w / 2.0).exp();
            assert!((spec.data[idx].re * scale - expect).abs() < 1e-8);
        }
        assert!(gaussian(&g, 0.5, &[0.0, 0.0]).is_err());
        assert!(gaussian(&g, 6.0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn random_fields() {
        let g = Grid::new(2, 64, 4.0 * PI).unwrap();
        let a = random_band_limited(&g, 1, 3, 9).unwrap();
        let b = random_band_limited(&g, 1, 3, 9).unwrap();
        assert_eq!(a, b);
        let phys = a.to_physical();
        assert!(phys.data.iter().all(|c| c.im.abs() < 1e-12));
        assert_eq!(a.data[0].norm(), 0.0);
        let k_lo = 1;
        let (k_min, _) = g.shell_range();
        for k in k_min..=k_lo - 2 {
            assert!(dyadic_project(&a, k).unwrap().data.iter().all(|c| c.norm() < 1e-12));
        }
        assert!(random_band_limited(&g, 3, 1, 0).is_err());
    }
}

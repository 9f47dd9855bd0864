//! Lebesgue, Besov, Triebel-Lizorkin and Sobolev norms of sampled fields.
//!
//! Exponents are f64 with `f64::INFINITY` for ∞. Homogeneous norms sum over
//! the resolved shell range unless a narrower range is given.

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{invalid, GnError, Result};
use crate::param_checker::SpaceTriple;
use crate::spectral::{inhomog_project, radial_multiplier, zero_mode_fraction, CutoffProfile, Domain, Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormFamily {
    Lebesgue,
    HomogBesov,
    InhomogBesov,
    HomogTriebel,
    InhomogTriebel,
    HomogSobolev,
    BesselSobolev,
}

impl NormFamily {
    pub fn is_homogeneous(&self) -> bool {
        matches!(self, NormFamily::HomogBesov | NormFamily::HomogTriebel | NormFamily::HomogSobolev)
    }
}

impl std::str::FromStr for NormFamily {
    type Err = GnError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "lebesgue" | "lp" => NormFamily::Lebesgue,
            "homogbesov" | "besov" => NormFamily::HomogBesov,
            "inhomogbesov" => NormFamily::InhomogBesov,
            "homogtriebel" | "triebel" => NormFamily::HomogTriebel,
            "inhomogtriebel" => NormFamily::InhomogTriebel,
            "homogsobolev" | "sobolev" => NormFamily::HomogSobolev,
            "besselsobolev" | "bessel" => NormFamily::BesselSobolev,
            _ => return invalid(format!("unknown norm family {s}")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSpec {
    pub family: NormFamily,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub m2: f64,
    pub shell_range: Option<(i32, i32)>,
}

impl NormSpec {
    pub fn new(family: NormFamily, s: f64, p: f64, q: f64) -> NormSpec {
        NormSpec { family, s, p, q, m2: 0.0, shell_range: None }
    }

    pub fn lebesgue(p: f64) -> NormSpec {
        NormSpec::new(NormFamily::Lebesgue, 0.0, p, 2.0)
    }

    pub fn besov(s: f64, p: f64, q: f64) -> NormSpec {
        NormSpec::new(NormFamily::HomogBesov, s, p, q)
    }

    pub fn triebel(s: f64, p: f64, q: f64) -> NormSpec {
        NormSpec::new(NormFamily::HomogTriebel, s, p, q)
    }

    pub fn from_triple(family: NormFamily, t: &SpaceTriple) -> NormSpec {
        NormSpec::new(family, t.s_f64(), t.p_f64(), t.q_f64())
    }

    pub fn with_shells(mut self, lo: i32, hi: i32) -> NormSpec {
        self.shell_range = Some((lo, hi));
        self
    }

    pub fn with_m2(mut self, m2: f64) -> NormSpec {
        self.m2 = m2;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 0.0) {
            return invalid(format!("p = {} must be positive", self.p));
        }
        if !(self.q > 0.0) {
            return invalid(format!("q = {} must be positive", self.q));
        }
        if !self.s.is_finite() {
            return invalid("s must be finite");
        }
        if !(self.m2 >= 0.0 && self.m2.is_finite()) {
            return invalid(format!("m2 = {} must be nonnegative", self.m2));
        }
        Ok(())
    }
}

fn ser_ext<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormResult {
    pub family: NormFamily,
    pub s: f64,
    #[serde(serialize_with = "ser_ext")]
    pub p: f64,
    #[serde(serialize_with = "ser_ext")]
    pub q: f64,
    pub value: f64,
    pub shell_range: Option<[i32; 2]>,
    pub warnings: Vec<String>,
}

const CHUNK: usize = 4096;
const NOISE_FLOOR: f64 = 1e-13;

/// Sum with a fixed chunking, so the result does not depend on thread count.
fn stable_sum<F>(values: &[f64], f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let partial: Vec<f64> = values.par_chunks(CHUNK).map(|c| c.iter().map(|&v| f(v)).sum()).collect();
    partial.iter().sum()
}

/// (h^n Σ|v|^p)^{1/p} for magnitudes v; p = ∞ gives the max.
pub fn lp_of_magnitudes(values: &[f64], p: f64, cell: f64) -> f64 {
    // f64::max would swallow NaN
    let peak = values.par_iter().cloned().reduce(|| 0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
    if p.is_infinite() {
        return peak;
    }
    if peak == 0.0 {
        return 0.0;
    }
    // scale by the peak so large p does not overflow
    let sum = stable_sum(values, |v| (v / peak).powf(p));
    peak * (sum * cell).powf(1.0 / p)
}

pub fn lp_norm(field: &Field, p: f64) -> Result<f64> {
    if field.domain != Domain::Physical {
        return Err(GnError::DomainMismatch { expected: "physical", found: field.domain.name() });
    }
    if !(p > 0.0) {
        return invalid(format!("p = {p} must be positive"));
    }
    let mags: Vec<f64> = field.data.par_iter().map(|c| c.norm()).collect();
    Ok(lp_of_magnitudes(&mags, p, field.grid.cell_volume()))
}

/// ℓ^q norm of a finite sequence; q = ∞ gives the max.
pub fn lq_of(terms: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return terms.iter().cloned().fold(0.0, f64::max);
    }
    let peak = terms.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    peak * terms.iter().map(|t| (t / peak).powf(q)).sum::<f64>().powf(1.0 / q)
}

/// Physical magnitudes |Δ_k f| for a run of shells, computed once and reused
/// across (s, p, q).
#[derive(Clone, Debug)]
pub struct ShellDecomposition {
    pub grid: Grid,
    pub homogeneous: bool,
    pub shells: Vec<i32>,
    pub magnitudes: Vec<Vec<f64>>,
    lp_cache: std::collections::HashMap<(usize, u64), f64>,
}

fn resolve_range(grid: &Grid, homogeneous: bool, range: Option<(i32, i32)>) -> Result<(i32, i32)> {
    let (k_min, k_max) = grid.shell_range();
    let lo_bound = if homogeneous { k_min } else { 0 };
    if lo_bound > k_max {
        return Err(GnError::Degenerate(format!(
            "grid resolves no shells (k_min = {lo_bound}, k_max = {k_max})"
        )));
    }
    let (lo, hi) = range.unwrap_or((lo_bound, k_max));
    if lo > hi {
        return invalid(format!("empty shell range [{lo}, {hi}]"));
    }
    for k in [lo, hi] {
        if k < lo_bound || k > k_max {
            return Err(GnError::ShellOutOfRange { k, k_min: lo_bound, k_max });
        }
    }
    Ok((lo, hi))
}

impl ShellDecomposition {
    pub fn new(field: &Field, homogeneous: bool, range: Option<(i32, i32)>) -> Result<ShellDecomposition> {
        let grid = field.grid;
        let (lo, hi) = resolve_range(&grid, homogeneous, range)?;
        let spec = field.to_fourier();
        let c = CutoffProfile;
        let mut shells = Vec::new();
        let mut magnitudes = Vec::new();
        for k in lo..=hi {
            let block = if homogeneous {
                radial_multiplier(&spec, |r| c.phi_k(k, r))
            } else {
                inhomog_project(&spec, k)?
            };
            let phys = block.into_domain(Domain::Physical);
            magnitudes.push(phys.data.par_iter().map(|v| v.norm()).collect());
            shells.push(k);
        }
        // FFT round-off leaks ~1e-16 into empty shells; with p or q below 1 that
        // noise is amplified, so it is cut at a floor relative to the peak.
        let peak = magnitudes.iter().flat_map(|m: &Vec<f64>| m.iter()).cloned().fold(0.0, f64::max);
        let floor = NOISE_FLOOR * peak;
        magnitudes.par_iter_mut().for_each(|m| m.iter_mut().for_each(|v| if *v < floor { *v = 0.0 }));
        Ok(ShellDecomposition { grid, homogeneous, shells, magnitudes, lp_cache: Default::default() })
    }

    pub fn range(&self) -> (i32, i32) {
        (self.shells[0], *self.shells.last().unwrap())
    }

    /// ‖Δ_k f‖_p for every shell in order.
    pub fn shell_lp(&mut self, p: f64) -> Vec<f64> {
        let cell = self.grid.cell_volume();
        (0..self.shells.len())
            .map(|i| {
                let key = (i, p.to_bits());
                if let Some(v) = self.lp_cache.get(&key) {
                    return *v;
                }
                let v = lp_of_magnitudes(&self.magnitudes[i], p, cell);
                self.lp_cache.insert(key, v);
                v
            })
            .collect()
    }

    pub fn besov(&mut self, s: f64, p: f64, q: f64) -> f64 {
        let lp = self.shell_lp(p);
        let terms: Vec<f64> = self.shells.iter().zip(&lp).map(|(&k, v)| 2f64.powf(k as f64 * s) * v).collect();
        lq_of(&terms, q)
    }

    pub fn triebel(&self, s: f64, p: f64, q: f64) -> f64 {
        let weights: Vec<f64> = self.shells.iter().map(|&k| 2f64.powf(k as f64 * s)).collect();
        let len = self.grid.len();
        let agg: Vec<f64> = (0..len)
            .into_par_iter()
            .map(|x| {
                let terms = weights.iter().zip(&self.magnitudes).map(|(w, m)| w * m[x]);
                if q.is_infinite() {
                    terms.fold(0.0, f64::max)
                } else {
                    let t: Vec<f64> = terms.collect();
                    lq_of(&t, q)
                }
            })
            .collect();
        lp_of_magnitudes(&agg, p, self.grid.cell_volume())
    }
}

fn result(spec: &NormSpec, value: f64, range: Option<(i32, i32)>, warnings: Vec<String>) -> NormResult {
    NormResult {
        family: spec.family,
        s: spec.s,
        p: spec.p,
        q: spec.q,
        value,
        shell_range: range.map(|(a, b)| [a, b]),
        warnings,
    }
}

pub fn besov_norm(field: &Field, spec: &NormSpec) -> Result<NormResult> {
    spec.validate()?;
    let homogeneous = match spec.family {
        NormFamily::HomogBesov => true,
        NormFamily::InhomogBesov => false,
        other => return invalid(format!("besov_norm called with {other:?}")),
    };
    let mut dec = ShellDecomposition::new(field, homogeneous, spec.shell_range)?;
    let value = dec.besov(spec.s, spec.p, spec.q);
    Ok(result(spec, value, Some(dec.range()), vec![]))
}

pub fn triebel_norm(field: &Field, spec: &NormSpec) -> Result<NormResult> {
    spec.validate()?;
    let homogeneous = match spec.family {
        NormFamily::HomogTriebel => true,
        NormFamily::InhomogTriebel => false,
        other => return invalid(format!("triebel_norm called with {other:?}")),
    };
    if spec.p.is_infinite() {
        return invalid("Triebel-Lizorkin norms need p < ∞");
    }
    let dec = ShellDecomposition::new(field, homogeneous, spec.shell_range)?;
    let value = dec.triebel(spec.s, spec.p, spec.q);
    Ok(result(spec, value, Some(dec.range()), vec![]))
}

pub fn sobolev_norm(field: &Field, spec: &NormSpec) -> Result<NormResult> {
    spec.validate()?;
    let (m2, homogeneous) = match spec.family {
        NormFamily::HomogSobolev => (0.0, true),
        NormFamily::BesselSobolev => (spec.m2, false),
        other => return invalid(format!("sobolev_norm called with {other:?}")),
    };
    let s = spec.s;
    let mut warnings = vec![];
    let singular = s < 0.0 && (homogeneous || m2 == 0.0);
    if singular && zero_mode_fraction(field) > 1e-12 {
        warnings.push("negative-order symbol on a field with nonzero mean; zero mode dropped".to_string());
    }
    let symbol = move |r: f64| {
        let base = m2 + r * r;
        if base == 0.0 {
            if s == 0.0 { 1.0 } else { 0.0 }
        } else {
            base.powf(s / 2.0)
        }
    };
    let value = if spec.p == 2.0 {
        let f = field.to_fourier();
        let d = f.grid.dxi();
        let grid = f.grid;
        let weighted: Vec<f64> = f
            .data
            .par_iter()
            .enumerate()
            .map(|(idx, c)| {
                let w = grid.wrapped(idx);
                let r = d * ((w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) as f64).sqrt();
                symbol(r) * c.norm()
            })
            .collect();
        lp_of_magnitudes(&weighted, 2.0, grid.cell_volume())
    } else {
        let g = radial_multiplier(field, symbol).into_domain(Domain::Physical);
        lp_norm(&g, spec.p)?
    };
    Ok(result(spec, value, None, warnings))
}

/// Dispatches on `spec.family`.
pub fn norm(field: &Field, spec: &NormSpec) -> Result<NormResult> {
    match spec.family {
        NormFamily::Lebesgue => {
            spec.validate()?;
            let v = lp_norm(&field.to_physical(), spec.p)?;
            Ok(result(spec, v, None, vec![]))
        }
        NormFamily::HomogBesov | NormFamily::InhomogBesov => besov_norm(field, spec),
        NormFamily::HomogTriebel | NormFamily::InhomogTriebel => triebel_norm(field, spec),
        NormFamily::HomogSobolev | NormFamily::BesselSobolev => sobolev_norm(field, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::num_complex::Complex64;
    use std::f64::consts::PI;

    fn gaussian(g: Grid) -> Field {
        Field::from_fn(g, |x| Complex64::new((-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp(), 0.0))
    }

    #[test]
    fn nan_is_not_hidden() {
        let mut v = vec![0.0; 100];
        v[7] = f64::NAN;
        for p in [1.0, 2.0, f64::INFINITY] {
            assert!(lp_of_magnitudes(&v, p, 1.0).is_nan());
        }
    }

    #[test]
    fn constant_and_zero() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let f = Field::from_fn(g, |_| Complex64::new(-2.0, 0.0));
        for p in [0.5, 1.0, 2.0, 7.0] {
            let v = lp_norm(&f, p).unwrap();
            assert!((v - 2.0 * 9f64.powf(1.0 / p)).abs() < 1e-12);
        }
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 2.0);
        assert!(lp_norm(&f, 0.0).is_err());
        assert!(lp_norm(&f.to_fourier(), 2.0).is_err());
        let z = Field::zeros(g, Domain::Physical);
        assert_eq!(besov_norm(&z, &NormSpec::besov(1.0, 2.0, 2.0)).unwrap().value, 0.0);
        assert_eq!(triebel_norm(&z, &NormSpec::triebel(1.0, 2.0, 1.0)).unwrap().value, 0.0);
    }

    #[test]
    fn gaussian_l2() {
        let g = Grid::new(1, 512, 40.0).unwrap();
        let v = lp_norm(&gaussian(g), 2.0).unwrap();
        assert!((v - PI.powf(0.25)).abs() < 1e-8);
    }

    fn single_shell(g: Grid, k0: i32) -> Field {
        // a few plane waves with 3/4·2^k0 ≤ |ξ| ≤ 2^k0
        let d = g.dxi();
        let lo = (0.75 * 2f64.powi(k0) / d).ceil() as i64;
        let hi = (2f64.powi(k0) / d).floor() as i64;
        assert!(hi > lo);
        Field::from_fn(g, move |x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, w) in (lo..=hi).enumerate() {
                acc += Complex64::new(0.0, w as f64 * d * x[0]).exp() * (1.0 + i as f64);
            }
            acc
        })
    }

    #[test]
    fn single_shell_identity() {
        let g = Grid::new(1, 256, 64.0).unwrap();
        let f = single_shell(g, 2);
        for (s, p, q) in [(0.5, 2.0, 1.0), (-1.0, 3.0, f64::INFINITY), (2.0, 0.7, 0.5)] {
            let b = besov_norm(&f, &NormSpec::besov(s, p, q)).unwrap().value;
            let expect = 2f64.powf(2.0 * s) * lp_norm(&f, p).unwrap();
            assert!(((b - expect) / expect).abs() < 1e-10);
            let t = triebel_norm(&f, &NormSpec::triebel(s, p, q)).unwrap().value;
            assert!(((t - expect) / expect).abs() < 1e-10);
        }
    }

    #[test]
    fn besov_equals_triebel_when_p_is_q() {
        let g = Grid::new(2, 32, 12.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new((-(x[0] * x[0] + 2.0 * x[1] * x[1]) / 3.0).exp() * (x[0] * 2.0).cos(), 0.0));
        for p in [1.0, 2.0, 3.5] {
            let b = besov_norm(&f, &NormSpec::besov(0.3, p, p)).unwrap().value;
            let t = triebel_norm(&f, &NormSpec::triebel(0.3, p, p)).unwrap().value;
            assert!(((b - t) / b).abs() < 1e-10);
        }
    }

    #[test]
    fn homogeneous_matches_inhomogeneous_at_high_frequency() {
        let g = Grid::new(1, 256, 2.0 * PI).unwrap();
        let f = single_shell(g, 4);
        let h = besov_norm(&f, &NormSpec::besov(1.0, 2.0, 2.0)).unwrap().value;
        let mut spec = NormSpec::besov(1.0, 2.0, 2.0);
        spec.family = NormFamily::InhomogBesov;
        let i = besov_norm(&f, &spec).unwrap().value;
        assert!(((h - i) / h).abs() < 1e-10);
    }

    #[test]
    fn shell_range_checked() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = gaussian(g);
        let spec = NormSpec::besov(0.0, 2.0, 2.0).with_shells(0, 9);
        assert!(matches!(besov_norm(&f, &spec), Err(GnError::ShellOutOfRange { .. })));
        let r = besov_norm(&f, &NormSpec::besov(0.0, 2.0, 2.0)).unwrap();
        assert_eq!(r.shell_range, Some([1, 4]));
        assert!(triebel_norm(&f, &NormSpec::triebel(0.0, f64::INFINITY, 2.0)).is_err());
    }

    #[test]
    fn sobolev_oracles() {
        let g = Grid::new(1, 512, 40.0).unwrap();
        let f = gaussian(g);
        let h1 = sobolev_norm(&f, &NormSpec::new(NormFamily::HomogSobolev, 1.0, 2.0, 2.0)).unwrap();
        assert!((h1.value - (PI.sqrt() / 2.0).sqrt()).abs() < 1e-8);
        let b0 = sobolev_norm(&f, &NormSpec::new(NormFamily::BesselSobolev, 0.0, 2.0, 2.0).with_m2(3.0)).unwrap();
        assert!((b0.value - lp_norm(&f, 2.0).unwrap()).abs() < 1e-13);
        let neg = sobolev_norm(&f, &NormSpec::new(NormFamily::HomogSobolev, -0.5, 2.0, 2.0)).unwrap();
        assert_eq!(neg.warnings.len(), 1);

        let g3 = Grid::new(3, 16, 2.0 * PI).unwrap();
        let wave = Field::from_fn(g3, |x| Complex64::new(0.0, 2.0 * x[0] + x[2]).exp());
        let v = sobolev_norm(&wave, &NormSpec::new(NormFamily::HomogSobolev, 0.6, 2.0, 2.0)).unwrap().value;
        let expect = 5f64.sqrt().powf(0.6) * g3.volume().sqrt();
        assert!(((v - expect) / expect).abs() < 1e-12);
        let v4 = sobolev_norm(&wave, &NormSpec::new(NormFamily::HomogSobolev, 0.6, 4.0, 2.0)).unwrap().value;
        let expect4 = 5f64.sqrt().powf(0.6) * g3.volume().powf(0.25);
        assert!(((v4 - expect4) / expect4).abs() < 1e-12);
    }

    #[test]
    fn result_json() {
        let g = Grid::new(1, 64, 10.0).unwrap();
        let r = besov_norm(&gaussian(g), &NormSpec::besov(0.5, 2.0, f64::INFINITY)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["q"], "inf");
        assert_eq!(v["family"], "HomogBesov");
        for key in ["family", "s", "p", "q", "value", "shell_range", "warnings"] {
            assert!(v.get(key).is_some());
        }
    }
}

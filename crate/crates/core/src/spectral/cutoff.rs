use serde::Serialize;

use super::Grid;

fn h(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff ψ with ψ = 1 on |ξ| ≤ 1 and ψ = 0 on |ξ| ≥ 3/2.
///
/// φ = ψ − ψ(2·) lives on 1/2 < |ξ| < 3/2 and equals 1 on [3/4, 1], so a
/// bump of radius 3/4 centred at 7·2^{j−3} sits inside the flat zone of φ_j.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CutoffProfile;

impl CutoffProfile {
    pub const INNER: f64 = 1.0;
    pub const OUTER: f64 = 1.5;

    pub fn psi(&self, r: f64) -> f64 {
        if r <= Self::INNER {
            return 1.0;
        }
        if r >= Self::OUTER {
            return 0.0;
        }
        let a = h(Self::OUTER - r);
        let b = h(r - Self::INNER);
        a / (a + b)
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.psi(r) - self.psi(2.0 * r)
    }

    /// φ_k(ξ) = φ(2^{−k}|ξ|), written as a difference of ψ's so that sums
    /// over consecutive k telescope in floating point.
    pub fn phi_k(&self, k: i32, r: f64) -> f64 {
        let t = r * 2f64.powi(-k);
        self.psi(t) - self.psi(2.0 * t)
    }

    pub fn psi_k(&self, k: i32, r: f64) -> f64 {
        self.psi(r * 2f64.powi(-k))
    }

    /// Inhomogeneous block: ψ for k = 0, φ_k for k ≥ 1.
    pub fn inhomog_k(&self, k: i32, r: f64) -> f64 {
        if k == 0 {
            self.psi(r)
        } else {
            self.phi_k(k, r)
        }
    }

    /// Shells whose support can contain radius r.
    pub fn shells_touching(&self, r: f64) -> std::ops::RangeInclusive<i32> {
        if r <= 0.0 {
            return 1..=0;
        }
        let l = r.log2();
        let lo = (l - Self::OUTER.log2()).floor() as i32;
        let hi = (l + 1.0).ceil() as i32;
        lo..=hi
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    /// max |Σ_k φ_k − 1| over 2^{k_min} ≤ |ξ| ≤ 2^{k_max}.
    pub homogeneous: f64,
    /// max |Σ_{k=0}^{k_max} ψ_k − ψ(2^{−k_max}ξ)| over the whole lattice, ξ = 0 included.
    pub inhomogeneous: f64,
    /// Σ_k φ_k(0), reported apart since ξ = 0 is excluded from the homogeneous identity.
    pub at_origin: f64,
    pub points_checked: usize,
}

impl PartitionReport {
    pub fn max_deviation(&self) -> f64 {
        self.homogeneous.max(self.inhomogeneous)
    }
}

pub fn partition_check(grid: &Grid, profile: &CutoffProfile) -> PartitionReport {
    use rayon::prelude::*;
    let (k_min, k_max) = grid.shell_range();
    let lo = 2f64.powi(k_min);
    let hi = 2f64.powi(k_max);
    let xi = grid.xi_norms();
    let (homogeneous, inhomogeneous, count) = xi
        .par_iter()
        .map(|&r| {
            let mut dev_h = 0.0f64;
            let mut n = 0usize;
            if r >= lo && r <= hi {
                let sum: f64 = (k_min..=k_max).map(|k| profile.phi_k(k, r)).sum();
                dev_h = (sum - 1.0).abs();
                n = 1;
            }
            let inh: f64 = (0..=k_max.max(0)).map(|k| profile.inhomog_k(k, r)).sum();
            let dev_i = (inh - profile.psi_k(k_max.max(0), r)).abs();
            (dev_h, dev_i, n)
        })
        .reduce(|| (0.0, 0.0, 0), |a, b| (a.0.max(b.0), a.1.max(b.1), a.2 + b.2));
    let at_origin = (k_min..=k_max).map(|k| profile.phi_k(k, 0.0)).sum();
    PartitionReport {
        homogeneous,
        inhomogeneous,
        at_origin,
        points_checked: count,
    }
}

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GnError, Result};

/// Periodic box [−L/2, L/2)ⁿ sampled with `points` per axis.
///
/// Index j on an axis sits at x = h·w(j) with w(j) = j for j < N/2 and
/// j − N otherwise, so the origin is index 0. Fourier index k carries the
/// frequency ξ = (2π/L)·w(k).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub points: usize,
    pub length: f64,
}

pub fn make_grid(n: usize, points: usize, length: f64) -> Result<Grid> {
    Grid::new(n, points, length)
}

impl Grid {
    pub fn new(n: usize, points: usize, length: f64) -> Result<Grid> {
        if !(1..=3).contains(&n) {
            return Err(GnError::InvalidGrid(format!("dimension {n} not in 1..=3")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(GnError::InvalidGrid(format!(
                "points per dimension {points} must be a power of two >= 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(GnError::InvalidGrid(format!("box length {length} must be positive")));
        }
        Ok(Grid { n, points, length })
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.n as i32)
    }

    /// Lattice spacing 2π/L of the frequency grid.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / self.length
    }

    pub fn k_max(&self) -> i32 {
        (self.nyquist().log2() + 1e-9).floor() as i32 - 1
    }

    pub fn k_min(&self) -> i32 {
        (self.dxi().log2() - 1e-9).ceil() as i32 + 1
    }

    pub fn shell_range(&self) -> (i32, i32) {
        (self.k_min(), self.k_max())
    }

    pub fn check_shell(&self, k: i32) -> Result<()> {
        let (k_min, k_max) = self.shell_range();
        if k < k_min || k > k_max {
            Err(GnError::ShellOutOfRange { k, k_min, k_max })
        } else {
            Ok(())
        }
    }

    /// Signed index w(j) ∈ [−N/2, N/2).
    pub fn wrap(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Inverse of [`Grid::wrap`]; `None` if w lies outside [−N/2, N/2).
    pub fn unwrap_index(&self, w: i64) -> Option<usize> {
        let n = self.points as i64;
        if w < -n / 2 || w >= n / 2 {
            None
        } else if w < 0 {
            Some((w + n) as usize)
        } else {
            Some(w as usize)
        }
    }

    /// Per-axis indices of a linear (row-major) index.
    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in (0..self.n).rev() {
            out[a] = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn linear_index(&self, multi: &[usize]) -> usize {
        multi[..self.n].iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Signed lattice vector w of a linear index.
    pub fn wrapped(&self, idx: usize) -> [i64; 3] {
        let m = self.multi_index(idx);
        let mut w = [0i64; 3];
        for a in 0..self.n {
            w[a] = self.wrap(m[a]);
        }
        w
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let w = self.wrapped(idx);
        let h = self.spacing();
        [w[0] as f64 * h, w[1] as f64 * h, w[2] as f64 * h]
    }

    pub fn frequency(&self, idx: usize) -> [f64; 3] {
        let w = self.wrapped(idx);
        let d = self.dxi();
        [w[0] as f64 * d, w[1] as f64 * d, w[2] as f64 * d]
    }

    /// |ξ| at every lattice point, row-major.
    pub fn xi_norms(&self) -> Vec<f64> {
        let d = self.dxi();
        (0..self.len())
            .map(|idx| {
                let w = self.wrapped(idx);
                let s: i64 = w.iter().map(|v| v * v).sum();
                d * (s as f64).sqrt()
            })
            .collect()
    }

    /// Integer |w|² at every lattice point.
    pub fn index_norms_sq(&self) -> Vec<i64> {
        (0..self.len())
            .map(|idx| self.wrapped(idx).iter().map(|v| v * v).sum())
            .collect()
    }
}

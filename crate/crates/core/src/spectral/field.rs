use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::fft_nd;
use super::Grid;
use crate::error::{GnError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Physical,
    Fourier,
}

impl Domain {
    pub fn name(&self) -> &'static str {
        match self {
            Domain::Physical => "physical",
            Domain::Fourier => "fourier",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Sampled complex function on a periodic grid.
///
/// Fourier data holds unitary DFT coefficients, so Σ|F|² = Σ|f|² and the
/// physical L² norm is (h^n Σ|F|²)^{1/2}.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub domain: Domain,
    pub data: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid, domain: Domain) -> Field {
        Field {
            grid,
            domain,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_data(grid: Grid, domain: Domain, data: Vec<Complex64>) -> Result<Field> {
        if data.len() != grid.len() {
            return Err(GnError::InvalidParameter(format!(
                "data length {} does not match grid size {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Field { grid, domain, data })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Field> {
        Field::from_data(grid, Domain::Physical, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Samples f at every grid position (origin at index 0).
    pub fn from_fn<F>(grid: Grid, f: F) -> Field
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let x = grid.position(idx);
                f(&x[..grid.n])
            })
            .collect();
        Field {
            grid,
            domain: Domain::Physical,
            data,
        }
    }

    /// Fourier-domain field whose physical samples approximate
    /// f(x) = (2π)^{−n} ∫ f̂(ξ) e^{iξ·x} dξ, given f̂ on the lattice.
    pub fn from_spectrum<F>(grid: Grid, fhat: F) -> Field
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let scale = (grid.len() as f64).sqrt() / grid.volume();
        let data = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let xi = grid.frequency(idx);
                fhat(&xi[..grid.n]) * scale
            })
            .collect();
        Field {
            grid,
            domain: Domain::Fourier,
            data,
        }
    }

    /// Continuous-transform value f̂(ξ) represented by each Fourier coefficient.
    pub fn spectrum_scale(grid: &Grid) -> f64 {
        grid.volume() / (grid.len() as f64).sqrt()
    }

    pub fn transform(&self, direction: Direction) -> Result<Field> {
        let (expected, target, forward) = match direction {
            Direction::Forward => (Domain::Physical, Domain::Fourier, true),
            Direction::Inverse => (Domain::Fourier, Domain::Physical, false),
        };
        if self.domain != expected {
            return Err(GnError::DomainMismatch {
                expected: expected.name(),
                found: self.domain.name(),
            });
        }
        let mut data = self.data.clone();
        fft_nd(&mut data, &self.grid, forward);
        Ok(Field {
            grid: self.grid,
            domain: target,
            data,
        })
    }

    pub fn to_fourier(&self) -> Field {
        match self.domain {
            Domain::Fourier => self.clone(),
            Domain::Physical => self.transform(Direction::Forward).expect("domain checked"),
        }
    }

    pub fn to_physical(&self) -> Field {
        match self.domain {
            Domain::Physical => self.clone(),
            Domain::Fourier => self.transform(Direction::Inverse).expect("domain checked"),
        }
    }

    pub fn into_domain(self, domain: Domain) -> Field {
        if self.domain == domain {
            return self;
        }
        let mut f = self;
        fft_nd(&mut f.data, &f.grid, domain == Domain::Fourier);
        f.domain = domain;
        f
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.re).collect()
    }

    /// (h^n Σ|·|²)^{1/2}; valid in either domain by Parseval.
    pub fn l2_norm(&self) -> f64 {
        let s = crate::sum::ordered_sum(self.data.len(), |i| self.data[i].norm_sqr());
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn scale(&mut self, a: f64) {
        self.data.par_iter_mut().for_each(|v| *v *= a);
    }

    pub fn add_scaled(&mut self, other: &Field, a: f64) -> Result<()> {
        self.check_compatible(other)?;
        self.data
            .par_iter_mut()
            .zip(other.data.par_iter())
            .for_each(|(v, w)| *v += w * a);
        Ok(())
    }

    pub fn check_compatible(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(GnError::InvalidParameter("fields live on different grids".into()));
        }
        if self.domain != other.domain {
            return Err(GnError::DomainMismatch {
                expected: self.domain.name(),
                found: other.domain.name(),
            });
        }
        Ok(())
    }

    /// Largest |difference| relative to the largest |value| of `self`.
    pub fn max_rel_diff(&self, other: &Field) -> f64 {
        let scale = self.data.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..grid.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Field::from_data(grid, Domain::Physical, data).unwrap()
    }

    #[test]
    fn round_trip_and_parseval() {
        for (n, pts) in [(1, 64), (2, 32), (3, 16)] {
            let g = Grid::new(n, pts, 3.0).unwrap();
            for seed in 0..5 {
                let f = random_field(g, seed);
                let back = f.to_fourier().to_physical();
                assert!(f.max_rel_diff(&back) < 1e-12);
                let a = f.l2_norm();
                let b = f.to_fourier().l2_norm();
                assert!(((a - b) / a).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plane_wave_is_a_spike() {
        let g = Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new(0.0, 3.0 * x[0] - 2.0 * x[1]).exp());
        let spec = f.to_fourier();
        let target = g.linear_index(&[g.unwrap_index(3).unwrap(), g.unwrap_index(-2).unwrap()]);
        for (idx, c) in spec.data.iter().enumerate() {
            if idx == target {
                assert!((c.norm() - 16.0).abs() < 1e-10);
            } else {
                assert!(c.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_field_and_domain_errors() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let z = Field::zeros(g, Domain::Physical);
        assert!(z.to_fourier().data.iter().all(|c| c.norm() == 0.0));
        assert!(z.transform(Direction::Inverse).is_err());
    }

    #[test]
    fn spectrum_sampling_matches_gaussian() {
        let g = Grid::new(1, 256, 40.0).unwrap();
        let f = Field::from_spectrum(g, |xi| {
            Complex64::new((2.0 * std::f64::consts::PI).sqrt() * (-xi[0] * xi[0] / 2.0).exp(), 0.0)
        })
        .to_physical();
        for (idx, v) in f.data.iter().enumerate() {
            let x = g.position(idx)[0];
            assert!((v.re - (-x * x / 2.0).exp()).abs() < 1e-12);
        }
    }
}

//! Periodic position/momentum grid with a unitary DFT between the two bases.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type CVec = Vec<Complex64>;
pub type CMat = DMatrix<Complex64>;

/// N points x_j = (j - N/2) dx on a circle of length L; momenta k_m = (m - N/2) / L.
///
/// States are stored in the position basis unless stated otherwise. The
/// momentum representation is psi~(k) = N^{-1/2} sum_x e^{-2 pi i k x} psi(x),
/// so that e^{2 pi i k x} is an eigenvector of p = (2 pi i)^{-1} d/dx.
#[derive(Clone)]
pub struct Grid {
    pub n: usize,
    pub l: f64,
    pub dx: f64,
    pub dk: f64,
    pub x: Vec<f64>,
    pub k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Grid(N={}, L={})", self.n, self.l)
    }
}

impl Grid {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::ConfigInvalid(format!("grid size {n} must be a power of two >= 4")));
        }
        if !(l > 0.0) {
            return Err(Error::ConfigInvalid(format!("grid length {l} must be positive")));
        }
        let dx = l / n as f64;
        let dk = 1.0 / l;
        let h = (n / 2) as f64;
        let x = (0..n).map(|j| (j as f64 - h) * dx).collect();
        let k = (0..n).map(|m| (m as f64 - h) * dk).collect();
        let mut planner = FftPlanner::new();
        Ok(Grid { n, l, dx, dk, x, k, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) })
    }

    /// Length scaled with sqrt(N) from a reference (N0, L0).
    pub fn scaled(n: usize, n0: usize, l0: f64) -> Result<Self> {
        Self::new(n, l0 * (n as f64 / n0 as f64).sqrt())
    }

    pub fn kmax(&self) -> f64 {
        0.5 * self.n as f64 * self.dk
    }

    // (-1)^j twiddle that centers both grids; e^{-i pi N/2} is 1 or -1 depending on N mod 4
    fn center_phase(&self) -> f64 {
        if (self.n / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Position amplitudes -> momentum amplitudes.
    pub fn to_momentum(&self, psi: &mut [Complex64]) {
        for (j, v) in psi.iter_mut().enumerate() {
            if j % 2 == 1 {
                *v = -*v;
            }
        }
        self.fwd.process(psi);
        let s = self.center_phase() / (self.n as f64).sqrt();
        for (m, v) in psi.iter_mut().enumerate() {
            *v *= if m % 2 == 1 { -s } else { s };
        }
    }

    /// Momentum amplitudes -> position amplitudes.
    pub fn to_position(&self, psi: &mut [Complex64]) {
        for (m, v) in psi.iter_mut().enumerate() {
            if m % 2 == 1 {
                *v = -*v;
            }
        }
        self.inv.process(psi);
        let s = self.center_phase() / (self.n as f64).sqrt();
        for (j, v) in psi.iter_mut().enumerate() {
            *v *= if j % 2 == 1 { -s } else { s };
        }
    }

    /// psi -> f(p) psi for a multiplier sampled on the momentum grid.
    pub fn apply_p(&self, f: &[Complex64], psi: &[Complex64]) -> CVec {
        let mut v = psi.to_vec();
        self.to_momentum(&mut v);
        for (a, b) in v.iter_mut().zip(f) {
            *a *= b;
        }
        self.to_position(&mut v);
        v
    }

    /// psi -> f(x) psi.
    pub fn apply_x(&self, f: &[Complex64], psi: &[Complex64]) -> CVec {
        psi.iter().zip(f).map(|(a, b)| a * b).collect()
    }

    pub fn sample_x<F: Fn(f64) -> Complex64>(&self, f: F) -> CVec {
        self.x.iter().map(|&x| f(x)).collect()
    }

    pub fn sample_k<F: Fn(f64) -> Complex64>(&self, f: F) -> CVec {
        self.k.iter().map(|&k| f(k)).collect()
    }

    /// Unitary DFT matrix U[m, j] = N^{-1/2} e^{-2 pi i k_m x_j}.
    pub fn dft_matrix(&self) -> CMat {
        let n = self.n;
        let h = (n / 2) as i64;
        let s = 1.0 / (n as f64).sqrt();
        CMat::from_fn(n, n, |m, j| {
            let e = ((m as i64 - h) * (j as i64 - h)).rem_euclid(n as i64) as f64;
            Complex64::from_polar(s, -2.0 * PI * e / n as f64)
        })
    }

    /// Dense matrix of f(p) in the position basis.
    pub fn p_matrix(&self, f: &[Complex64]) -> CMat {
        let u = self.dft_matrix();
        let d = CMat::from_diagonal(&nalgebra::DVector::from_column_slice(f));
        u.adjoint() * d * u
    }

    /// Dense diagonal matrix of f(x).
    pub fn x_matrix(&self, f: &[Complex64]) -> CMat {
        CMat::from_diagonal(&nalgebra::DVector::from_column_slice(f))
    }

    /// Normalized Gaussian e^{-(x - c)^2 / w^2} with momentum kick k0.
    pub fn gaussian(&self, center: f64, width: f64, k0: f64) -> CVec {
        let mut v: CVec = self
            .x
            .iter()
            .map(|&x| {
                let d = (x - center) / width;
                Complex64::from_polar((-d * d).exp(), 2.0 * PI * k0 * x)
            })
            .collect();
        normalize(&mut v);
        v
    }
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

pub fn diff_norm(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn axpy(a: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scale(a: Complex64, x: &[Complex64]) -> CVec {
    x.iter().map(|v| a * v).collect()
}

pub fn add(x: &[Complex64], y: &[Complex64]) -> CVec {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn sub(x: &[Complex64], y: &[Complex64]) -> CVec {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn mat_vec(m: &CMat, v: &[Complex64]) -> CVec {
    let r = m * nalgebra::DVector::from_column_slice(v);
    r.as_slice().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_matches_dense_dft() {
        let g = Grid::new(16, 5.0).unwrap();
        let psi = g.gaussian(0.3, 0.9, 0.4);
        let mut fast = psi.clone();
        g.to_momentum(&mut fast);
        let dense = mat_vec(&g.dft_matrix(), &psi);
        assert!(diff_norm(&fast, &dense) < 1e-13);
        g.to_position(&mut fast);
        assert!(diff_norm(&fast, &psi) < 1e-13);
    }

    #[test]
    fn plane_wave_is_momentum_eigenvector() {
        let g = Grid::new(32, 4.0).unwrap();
        let m0 = 19;
        let wave: CVec = g.x.iter().map(|&x| Complex64::from_polar(1.0, 2.0 * PI * g.k[m0] * x)).collect();
        let mut v = wave.clone();
        g.to_momentum(&mut v);
        for (m, z) in v.iter().enumerate() {
            if m == m0 {
                assert!((z.norm() - (32f64).sqrt()).abs() < 1e-12);
            } else {
                assert!(z.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_invariants() {
        let g = Grid::new(64, 7.0).unwrap();
        assert!((g.n as f64 * g.dx * g.dk - 1.0).abs() < 1e-15);
        assert!((g.k[0] + g.kmax()).abs() < 1e-15);
        assert!(Grid::new(48, 1.0).is_err());
    }
}

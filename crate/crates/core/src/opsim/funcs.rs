//! Functions of Hermitian lattice operators via dense eigendecomposition.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use super::grid::{CMat, CVec};
use crate::error::{Error, Result};

/// Eigendecomposition A = V diag(lambda) V^dagger of a Hermitian matrix.
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
    /// ||A - A^dagger|| / ||A|| before symmetrization.
    pub hermiticity_defect: f64,
}

/// Replace M by (M + M^dagger)/2 and report the relative defect.
pub fn symmetrize(m: &CMat) -> (CMat, f64) {
    let adj = m.adjoint();
    let defect = (m - &adj).norm() / m.norm().max(1e-300);
    ((m + adj) * Complex64::new(0.5, 0.0), defect)
}

impl HermEig {
    pub fn new(m: &CMat) -> Self {
        let (h, defect) = symmetrize(m);
        let e = SymmetricEigen::new(h);
        HermEig { values: e.eigenvalues.as_slice().to_vec(), vectors: e.eigenvectors, hermiticity_defect: defect }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Fail with NotPositive unless every eigenvalue is positive.
    pub fn require_positive(&self) -> Result<()> {
        let m = self.min();
        if m > 0.0 {
            Ok(())
        } else {
            Err(Error::NotPositive(m))
        }
    }

    /// f(A) psi.
    pub fn apply<F: Fn(f64) -> Complex64>(&self, f: F, psi: &[Complex64]) -> CVec {
        let fv: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        self.apply_values(&fv, psi)
    }

    /// V diag(fv) V^dagger psi for precomputed spectral values.
    pub fn apply_values(&self, fv: &[Complex64], psi: &[Complex64]) -> CVec {
        let p = DVector::from_column_slice(psi);
        let mut c = self.vectors.adjoint() * p;
        for (ci, f) in c.iter_mut().zip(fv) {
            *ci *= f;
        }
        (&self.vectors * c).as_slice().to_vec()
    }

    /// Dense matrix f(A).
    pub fn matrix<F: Fn(f64) -> Complex64>(&self, f: F) -> CMat {
        let mut v = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let fl = f(l);
            for i in 0..v.nrows() {
                v[(i, j)] *= fl;
            }
        }
        v * self.vectors.adjoint()
    }
}

/// Positive part of a real power, with negative rounding-level eigenvalues clipped to zero.
pub fn real_power(l: f64, gamma: f64) -> Complex64 {
    Complex64::new(l.max(0.0).powf(gamma), 0.0)
}

/// l^{c} for complex c on the positive half-line.
pub fn complex_power(l: f64, c: Complex64) -> Complex64 {
    if l <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    (c * l.ln()).exp()
}

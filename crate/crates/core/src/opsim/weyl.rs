//! Weyl pairs u = e^{2 pi b x}, v = e^{2 pi b p} and the quantum exponential checks.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::funcs::HermEig;
use super::grid::{diff_norm, norm, CMat, CVec, Grid};
use crate::error::Result;
use crate::modulus::Modulus;
use crate::specfun::{gb_pos, log_wb};
use serde::Serialize;

/// u = e^{bA}, v = e^{bB} with A = 2 pi x, B = 2 pi p, so uv = q^2 vu.
pub struct WeylPair {
    pub grid: Grid,
    pub b: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn weyl_pair(g: &Grid, m: &Modulus) -> WeylPair {
    let b = m.b.re;
    WeylPair {
        grid: g.clone(),
        b,
        u: g.x.iter().map(|&x| (2.0 * PI * b * x).exp()).collect(),
        v: g.k.iter().map(|&k| (2.0 * PI * b * k).exp()).collect(),
    }
}

fn cx(v: &[f64]) -> CVec {
    v.iter().map(|&a| Complex64::new(a, 0.0)).collect()
}

impl WeylPair {
    pub fn apply_u(&self, psi: &[Complex64]) -> CVec {
        self.grid.apply_x(&cx(&self.u), psi)
    }

    pub fn apply_v(&self, psi: &[Complex64]) -> CVec {
        self.grid.apply_p(&cx(&self.v), psi)
    }

    /// phi(u) psi for a scalar function of the position-diagonal u.
    pub fn fn_u<F: Fn(f64) -> Complex64>(&self, f: F, psi: &[Complex64]) -> CVec {
        let d: CVec = self.u.iter().map(|&a| f(a)).collect();
        self.grid.apply_x(&d, psi)
    }

    pub fn fn_v<F: Fn(f64) -> Complex64>(&self, f: F, psi: &[Complex64]) -> CVec {
        let d: CVec = self.v.iter().map(|&a| f(a)).collect();
        self.grid.apply_p(&d, psi)
    }

    pub fn u_matrix(&self) -> CMat {
        self.grid.x_matrix(&cx(&self.u))
    }

    pub fn v_matrix(&self) -> CMat {
        self.grid.p_matrix(&cx(&self.v))
    }

    /// Eigendecomposition of u + v.
    pub fn sum_eig(&self) -> HermEig {
        HermEig::new(&(self.u_matrix() + self.v_matrix()))
    }

    /// Eigendecomposition of q^{-1} u v = e^{b(A+B)} (Hermitian after symmetrization).
    pub fn quv_eig(&self, m: &Modulus) -> HermEig {
        let uv = self.u_matrix() * self.v_matrix();
        HermEig::new(&(uv * m.q.conj()))
    }

    /// Weyl relation residual ||(uv - q^2 vu) psi|| / ||psi||.
    pub fn weyl_residual(&self, m: &Modulus, psi: &[Complex64]) -> f64 {
        let uv = self.apply_u(&self.apply_v(psi));
        let vu = self.apply_v(&self.apply_u(psi));
        let q2 = m.q * m.q;
        let r: CVec = uv.iter().zip(&vu).map(|(a, b)| a - q2 * b).collect();
        norm(&r) / norm(psi)
    }
}

/// Test battery: Gaussians centered at the origin with the given widths.
pub fn battery(g: &Grid, widths: &[f64]) -> Vec<CVec> {
    widths.iter().map(|&w| g.gaussian(0.0, w, 0.0)).collect()
}

fn gb_fn(m: &Modulus) -> impl Fn(f64) -> Complex64 + '_ {
    move |l: f64| {
        if l <= 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            gb_pos(l, m).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        }
    }
}

/// max over the battery of ||g_b(u) g_b(v) psi - g_b(u+v) psi|| / ||psi||.
pub fn qexp_residual(w: &WeylPair, m: &Modulus, states: &[CVec]) -> Result<f64> {
    let e = w.sum_eig();
    let f = gb_fn(m);
    let fv: Vec<Complex64> = e.values.iter().map(|&l| f(l)).collect();
    let mut worst: f64 = 0.0;
    for psi in states {
        let lhs = w.fn_u(&f, &w.fn_v(&f, psi));
        let rhs = e.apply_values(&fv, psi);
        worst = worst.max(diff_norm(&lhs, &rhs) / norm(psi));
    }
    Ok(worst)
}

/// max over the battery of the pentagon residual
/// ||g_b(v) g_b(u) psi - g_b(u) g_b(q^{-1} u v) g_b(v) psi|| / ||psi||.
pub fn pentagon_residual(w: &WeylPair, m: &Modulus, states: &[CVec]) -> Result<f64> {
    let e = w.quv_eig(m);
    let f = gb_fn(m);
    let fv: Vec<Complex64> = e.values.iter().map(|&l| f(l)).collect();
    let mut worst: f64 = 0.0;
    for psi in states {
        let lhs = w.fn_v(&f, &w.fn_u(&f, psi));
        let rhs = w.fn_u(&f, &e.apply_values(&fv, &w.fn_v(&f, psi)));
        worst = worst.max(diff_norm(&lhs, &rhs) / norm(psi));
    }
    Ok(worst)
}

/// ||g_b(u) psi|| against ||psi||.
pub fn unitarity_defect(w: &WeylPair, m: &Modulus, psi: &[Complex64]) -> f64 {
    let f = gb_fn(m);
    (norm(&w.fn_u(&f, psi)) / norm(psi) - 1.0).abs()
}

/// Scalar functions available to the conjugation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConjFn {
    Identity,
    Log,
    Gb,
}

fn conj_fn(which: ConjFn, m: &Modulus, t: f64) -> Complex64 {
    match which {
        ConjFn::Identity => Complex64::new(t, 0.0),
        ConjFn::Log => Complex64::new(t.max(f64::MIN_POSITIVE).ln(), 0.0),
        ConjFn::Gb => gb_fn(m)(t),
    }
}

/// phi(u + v) against w_b(x - p) phi(e^{pi b (x + p)}) w_b(p - x).
///
/// With A = 2 pi x and B = 2 pi p the conjugating unitaries are w_b((A - B)/2pi) and its inverse.
pub fn conjugation_residual(which: ConjFn, w: &WeylPair, m: &Modulus, states: &[CVec]) -> Result<f64> {
    let g = &w.grid;
    let xm = g.x_matrix(&g.sample_x(|x| Complex64::new(x, 0.0)));
    let pm = g.p_matrix(&g.sample_k(|k| Complex64::new(k, 0.0)));
    let diff = HermEig::new(&(&xm - &pm));
    let sum = HermEig::new(&(&xm + &pm));
    let wv: Vec<Complex64> = diff.values.iter().map(|&l| log_wb(Complex64::new(l, 0.0), m).map(|v| v.value.exp())).collect::<Result<_>>()?;
    let wv_inv: Vec<Complex64> = wv.iter().map(|v| 1.0 / v).collect();
    let b = w.b;
    let mid: Vec<Complex64> = sum.values.iter().map(|&l| conj_fn(which, m, (PI * b * l).exp())).collect();
    let e = w.sum_eig();
    let lhs: Vec<Complex64> = e.values.iter().map(|&l| conj_fn(which, m, l)).collect();
    let mut worst: f64 = 0.0;
    for psi in states {
        let a = e.apply_values(&lhs, psi);
        let r = diff.apply_values(&wv, &sum.apply_values(&mid, &diff.apply_values(&wv_inv, psi)));
        worst = worst.max(diff_norm(&a, &r) / norm(psi));
    }
    Ok(worst)
}

/// ||(u + v)^{1/b^2} psi - (u^{1/b^2} + v^{1/b^2}) psi|| / ||psi||, maximized over the states.
pub fn power_additivity_residual(w: &WeylPair, states: &[CVec]) -> Result<f64> {
    let gamma = 1.0 / (w.b * w.b);
    let e = w.sum_eig();
    e.require_positive()?;
    let mut worst: f64 = 0.0;
    for psi in states {
        let lhs = e.apply(|l| Complex64::new(l.powf(gamma), 0.0), psi);
        let mut rhs = w.fn_u(|a| Complex64::new(a.powf(gamma), 0.0), psi);
        let v = w.fn_v(|a| Complex64::new(a.powf(gamma), 0.0), psi);
        rhs.iter_mut().zip(&v).for_each(|(a, b)| *a += b);
        worst = worst.max(diff_norm(&lhs, &rhs) / norm(psi));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(n: usize, l: f64, b: f64) -> (WeylPair, Modulus) {
        let m = Modulus::real(b).unwrap();
        (weyl_pair(&Grid::new(n, l).unwrap(), &m), m)
    }

    #[test]
    fn weyl_relation_and_positivity() {
        let (w, m) = pair(64, 8.0, 0.7);
        let psi = w.grid.gaussian(0.0, 0.6, 0.0);
        let r = w.weyl_residual(&m, &psi);
        assert!(r < 1e-2, "{r}");
        assert!(w.u.iter().chain(&w.v).all(|&a| a > 0.0));
        // log u is linear in the grid coordinate
        let d: Vec<f64> = w.u.windows(2).map(|p| (p[1] / p[0]).ln()).collect();
        assert!(d.iter().all(|&x| (x - d[0]).abs() < 1e-12));
        assert!(w.sum_eig().min() > 0.0);
    }

    #[test]
    fn quantum_exponential_and_pentagon() {
        let (w, m) = pair(64, 8.0, 0.7);
        let st = battery(&w.grid, &[0.6, 0.7]);
        assert!(qexp_residual(&w, &m, &st).unwrap() < 1e-5);
        assert!(pentagon_residual(&w, &m, &st).unwrap() < 1e-3);
    }

    #[test]
    fn gb_of_positive_operator_is_unitary() {
        let (w, m) = pair(64, 8.0, 0.7);
        let psi = w.grid.gaussian(0.3, 1.0, 0.2);
        assert!(unitarity_defect(&w, &m, &psi) < 1e-12);
    }

    #[test]
    fn additivity_is_exact_at_b_one() {
        let (w, _) = pair(32, 6.0, 1.0);
        let st = battery(&w.grid, &[0.6]);
        let r = power_additivity_residual(&w, &st).unwrap();
        assert!(r < 1e-7, "{r}");
    }

    #[test]
    fn identity_conjugation() {
        let (w, m) = pair(64, 8.0, 0.7);
        let st = battery(&w.grid, &[0.6]);
        let r = conjugation_residual(ConjFn::Identity, &w, &m, &st).unwrap();
        assert!(r < 1e-2, "{r}");
    }
}

//! The R-operator kernels in position and momentum space, and the momentum-space
//! action on a reduced two-particle grid.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::{KernelSample, SpinPair, I};
use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::opsim::grid::{diff_norm, norm, CVec, Grid};
use crate::opsim::rmat::Multi;
use crate::specfun::{log_gb_big, log_wb};

/// Relative change under eta halving that is still accepted.
pub const ETA_TOL: f64 = 1e-6;

fn lgb(z: Complex64, m: &Modulus) -> Result<Complex64> {
    Ok(log_gb_big(z, m)?.value)
}

fn lwb(x: Complex64, m: &Modulus) -> Result<Complex64> {
    Ok(log_wb(x, m)?.value)
}

/// The position kernel R(x2, x1 | x2', x1') with both denominators at Q + i(y + i eta).
pub fn r_kernel_position_at(x2: f64, x1: f64, x2p: f64, x1p: f64, sp: SpinPair, eta: f64, m: &Modulus) -> Result<Complex64> {
    let q = m.qq();
    let (s2, s1) = (sp.s2, sp.s1);
    let phase = 2.0 * PI * I * (s1 * (x1p - x1) + s2 * (x2 - x2p) + I * q / 2.0 * (x2 + x2p - x1 - x1p) + s1 * s2 + q * q / 4.0);
    let n1 = lgb(q / 2.0 + I * (0.5 * (s1 + s2) + x2 - x1), m)?;
    let d1 = lgb(q + I * (Complex64::new(0.5 * (s1 - s2) + x2 - x1p, eta)), m)?;
    let n2 = lgb(q / 2.0 + I * (-0.5 * (s1 + s2) + x2p - x1p), m)?;
    let d2 = lgb(q + I * (Complex64::new(0.5 * (s2 - s1) + x2p - x1, eta)), m)?;
    Ok((phase + n1 - d1 + n2 - d2).exp())
}

fn eta_checked<F: Fn(f64) -> Result<Complex64>>(f: F, eta: f64) -> Result<Complex64> {
    let a = f(eta)?;
    let b = f(0.5 * eta)?;
    let change = (a - b).norm() / b.norm().max(f64::MIN_POSITIVE);
    if change > ETA_TOL {
        return Err(Error::UnstableEta(change));
    }
    Ok(b)
}

/// Position kernel at eta / 2, refused when halving eta moves it by more than [`ETA_TOL`].
pub fn r_kernel_position(x2: f64, x1: f64, x2p: f64, x1p: f64, sp: SpinPair, eta: f64, m: &Modulus) -> Result<Complex64> {
    eta_checked(|e| r_kernel_position_at(x2, x1, x2p, x1p, sp, e, m), eta)
}

/// The smooth part of the momentum kernel on the slice k1' = k1 + tau, k2' = k2 - tau:
/// e^{-pi i (k1' k2 + k1 k2')} w_b(s1 + k1) / w_b(s1 + k1') w_b(s2 - k2) / w_b(s2 - k2').
pub fn r_momentum_smooth(k2: f64, k1: f64, tau: f64, sp: SpinPair, m: &Modulus) -> Result<Complex64> {
    let (k1p, k2p) = (k1 + tau, k2 - tau);
    let c = |x: f64| Complex64::new(x, 0.0);
    let ph = -PI * I * (k1p * k2 + k1 * k2p);
    let w = lwb(c(sp.s1 + k1), m)? - lwb(c(sp.s1 + k1p), m)? + lwb(c(sp.s2 - k2), m)? - lwb(c(sp.s2 - k2p), m)?;
    Ok((ph + w).exp())
}

/// 1 / G_b(Q + i(tau + i eta)).
pub fn inv_gb_shifted(tau: f64, eta: f64, m: &Modulus) -> Result<Complex64> {
    Ok((-lgb(m.qq() + I * Complex64::new(tau, eta), m)?).exp())
}

pub fn r_kernel_momentum_reduced_at(k2: f64, k1: f64, tau: f64, sp: SpinPair, eta: f64, m: &Modulus) -> Result<Complex64> {
    Ok(r_momentum_smooth(k2, k1, tau, sp, m)? * inv_gb_shifted(tau, eta, m)?)
}

/// The momentum kernel with the delta factor removed, at eta / 2, checked under eta halving.
pub fn r_kernel_momentum_reduced(k2: f64, k1: f64, tau: f64, sp: SpinPair, eta: f64, m: &Modulus) -> Result<Complex64> {
    eta_checked(|e| r_kernel_momentum_reduced_at(k2, k1, tau, sp, e, m), eta)
}

/// Fit of the tau -> 0 singularity of the momentum kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleFit {
    /// Slope of log |K| against log tau.
    pub order: f64,
    /// Residue of 1 / G_b(z) at z = Q recovered from the kernel.
    pub residue: Complex64,
}

/// Probes K(tau) at tau = t, t/2, t/4 and extracts the pole order and the residue
/// lim (z - Q) / G_b(z) = lim i tau K(tau) / K_smooth(0).
pub fn momentum_pole_fit(k2: f64, k1: f64, sp: SpinPair, t: f64, m: &Modulus) -> Result<PoleFit> {
    let a0 = r_momentum_smooth(k2, k1, 0.0, sp, m)?;
    let k = |tau: f64| r_kernel_momentum_reduced_at(k2, k1, tau, sp, 0.0, m);
    let (v1, v2, v4) = (k(t)?, k(t / 2.0)?, k(t / 4.0)?);
    let order = (v4.norm() / v2.norm()).ln() / 2f64.ln();
    let r = |tau: f64, v: Complex64| I * tau * v / a0;
    let (r1, r2, r4) = (r(t, v1), r(t / 2.0, v2), r(t / 4.0, v4));
    // two rounds of Richardson extrapolation in tau
    let e1 = 2.0 * r2 - r1;
    let e2 = 2.0 * r4 - r2;
    Ok(PoleFit { order, residue: (4.0 * e2 - e1) / 3.0 })
}

/// A two-particle state in momentum space on the reduced grid: index iP * n + ip with
/// P = k1 + k2 and p = (k1 - k2) / 2 taken from `grid.k`.
#[derive(Debug, Clone)]
pub struct MomentumState {
    pub grid: Grid,
    pub values: CVec,
    /// Discrepancy against the stride-two evaluation, relative to the output norm.
    pub err_est: f64,
}

impl MomentumState {
    pub fn new(grid: &Grid, values: CVec) -> Result<Self> {
        if values.len() != grid.n * grid.n {
            return Err(Error::ConfigInvalid(format!("expected {} values, got {}", grid.n * grid.n, values.len())));
        }
        Ok(MomentumState { grid: grid.clone(), values, err_est: 0.0 })
    }

    /// Normalized momentum image of a position-space profile f(x2, x1) on the reduced lattice.
    pub fn from_position<F: Fn(f64, f64) -> Complex64>(grid: &Grid, f: F) -> Result<Self> {
        let mp = Multi::new(grid, 2);
        let x = mp.sample_x(|c| f(c[0] - 0.5 * c[1], c[0] + 0.5 * c[1]));
        let mut k = mp.to_momentum(&x);
        let nn = norm(&k);
        if nn == 0.0 {
            return Err(Error::ConfigInvalid("zero state".into()));
        }
        k.iter_mut().for_each(|v| *v /= nn);
        MomentumState::new(grid, k)
    }

    /// Samples f(k2, k1).
    pub fn sample<F: Fn(f64, f64) -> Complex64>(grid: &Grid, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.n * grid.n);
        for &pp in &grid.k {
            for &p in &grid.k {
                values.push(f(0.5 * pp - p, 0.5 * pp + p));
            }
        }
        MomentumState { grid: grid.clone(), values, err_est: 0.0 }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }

    pub fn to_sample(&self) -> KernelSample {
        let mut s = KernelSample::new(&["k2", "k1"], 0.0, 0.0);
        let g = &self.grid;
        for (ip_big, &pp) in g.k.iter().enumerate() {
            for (ip, &p) in g.k.iter().enumerate() {
                s.points.push(vec![0.5 * pp - p, 0.5 * pp + p]);
                s.values.push(self.values[ip_big * g.n + ip]);
            }
        }
        s
    }
}

/// Relative disagreement between the full and the stride-two quadrature above which
/// [`apply_r_momentum`] reports [`Error::GridTooCoarse`].
pub const R_GRID_TOL: f64 = 0.25;

struct RowTables {
    // A_ij = phase * u_i / u_j, with u = w_b(s1 + k1) w_b(s2 - k2) and the p_i p_j phase
    u: CVec,
    phase: Complex64,
}

fn row_tables(pp: f64, g: &Grid, sp: SpinPair, m: &Modulus) -> Result<RowTables> {
    let u = g
        .k
        .iter()
        .map(|&p| {
            let (k2, k1) = (0.5 * pp - p, 0.5 * pp + p);
            Ok((lwb(Complex64::new(sp.s1 + k1, 0.0), m)? + lwb(Complex64::new(sp.s2 - k2, 0.0), m)?).exp())
        })
        .collect::<Result<CVec>>()?;
    Ok(RowTables { u, phase: Complex64::from_polar(1.0, -PI * pp * pp / 2.0) })
}

// sum over p' of the kernel on one P row, using every `stride`-th node around each output point
fn apply_row(row: &[Complex64], t: &RowTables, inv_g: &[Complex64], r0: Complex64, g: &Grid, stride: usize) -> CVec {
    let n = g.n;
    let h = g.dk * stride as f64;
    let c = I / (2.0 * PI);
    let a = |i: usize, j: usize| t.phase * Complex64::from_polar(1.0, 2.0 * PI * g.k[i] * g.k[j]) * t.u[i] / t.u[j];
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut j = i % stride;
            while j < n {
                if j != i {
                    let d = j as isize - i as isize;
                    acc += a(i, j) * inv_g[(d + n as isize - 1) as usize] * row[j];
                }
                j += stride;
            }
            acc *= h;
            let aii = a(i, i) * row[i];
            acc += h * r0 * aii + 0.5 * aii;
            // h g'(0) for g(tau) = A psi, by a five-point stencil where it fits
            let g = |o: usize, up: bool| if up { a(i, i + o) * row[i + o] } else { a(i, i - o) * row[i - o] };
            if i + 2 * stride < n && i >= 2 * stride {
                let d1 = g(stride, true) - g(stride, false);
                let d2 = g(2 * stride, true) - g(2 * stride, false);
                acc += c * (8.0 * d1 - d2) / 12.0;
            } else if i + stride < n && i >= stride {
                acc += 0.5 * c * (g(stride, true) - g(stride, false));
            }
            acc
        })
        .collect()
}

/// R acting on a momentum-space state through the reduced kernel, integrated along the
/// conservation slice. The tau = 0 singularity c / (tau + i0), c = i / 2 pi, is split into
/// its principal value (trapezoid with a first-derivative correction) and c (-i pi) delta.
pub fn apply_r_momentum(psi: &MomentumState, sp: SpinPair, m: &Modulus) -> Result<MomentumState> {
    apply_r_momentum_tol(psi, sp, m, R_GRID_TOL)
}

pub fn apply_r_momentum_tol(psi: &MomentumState, sp: SpinPair, m: &Modulus, tol: f64) -> Result<MomentumState> {
    if !m.is_real() {
        return Err(Error::WrongRegime);
    }
    let g = &psi.grid;
    let n = g.n;
    let inv_g = |stride: usize| -> Result<CVec> {
        (0..2 * n - 1)
            .map(|d| {
                let d = d as isize - (n as isize - 1);
                if d == 0 {
                    Ok(Complex64::new(0.0, 0.0))
                } else {
                    inv_gb_shifted(d as f64 * g.dk, 0.0, m)
                }
            })
            .collect::<Result<CVec>>()
            .map(|v| if stride == 1 { v } else { v })
    };
    let tab = inv_g(1)?;
    // smooth remainder of 1/G_b(Q + i tau) at tau = 0 from the symmetric average
    let r0_at = |h: f64| -> Result<Complex64> { Ok(0.5 * (inv_gb_shifted(h, 0.0, m)? + inv_gb_shifted(-h, 0.0, m)?)) };
    let (a1, a2, a4) = (r0_at(g.dk)?, r0_at(2.0 * g.dk)?, r0_at(4.0 * g.dk)?);
    let (r1, r2) = ((4.0 * a1 - a2) / 3.0, (4.0 * a2 - a4) / 3.0);
    let rows: Vec<(CVec, CVec)> = g
        .k
        .par_iter()
        .enumerate()
        .map(|(ip_big, &pp)| {
            let t = row_tables(pp, g, sp, m)?;
            let row = &psi.values[ip_big * n..(ip_big + 1) * n];
            Ok((apply_row(row, &t, &tab, r1, g, 1), apply_row(row, &t, &tab, r2, g, 2)))
        })
        .collect::<Result<_>>()?;
    let fine: CVec = rows.iter().flat_map(|r| r.0.iter().copied()).collect();
    let coarse: CVec = rows.iter().flat_map(|r| r.1.iter().copied()).collect();
    let err = diff_norm(&fine, &coarse) / norm(&fine).max(f64::MIN_POSITIVE);
    if err > tol {
        return Err(Error::GridTooCoarse(format!("stride-two discrepancy {err:.3e}")));
    }
    Ok(MomentumState { grid: g.clone(), values: fine, err_est: err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opsim::rmat::{r_lattice, Multi};

    fn m7() -> Modulus {
        Modulus::real(0.7).unwrap()
    }

    #[test]
    fn position_kernel_is_eta_stable() {
        let m = m7();
        let sp = SpinPair::new(0.5, 0.3);
        let v = r_kernel_position(0.3, -0.2, 0.1, 0.45, sp, 1e-8, &m).unwrap();
        let a = r_kernel_position_at(0.3, -0.2, 0.1, 0.45, sp, 1e-8, &m).unwrap();
        assert!((v - a).norm() < 1e-6 * v.norm());
        assert!(v.norm().is_finite() && v.norm() > 0.0);
    }

    #[test]
    fn position_kernel_matches_shifted_form() {
        // each denominator rebuilt from G_b(z) = (1 - e^{2 pi i b (z - b)}) G_b(z - b)
        let m = m7();
        let sp = SpinPair::new(0.5, 0.3);
        let (x2, x1, x2p, x1p) = (0.3, -0.2, 0.1, 0.45);
        let direct = r_kernel_position_at(x2, x1, x2p, x1p, sp, 0.0, &m).unwrap();
        let b = m.b;
        let q = m.qq();
        let shifted = |z: Complex64| -> Complex64 { (1.0 - (2.0 * PI * I * b * (z - b)).exp()) * lgb(z - b, &m).unwrap().exp() };
        let s = |z: Complex64| lgb(z, &m).unwrap().exp();
        let (s2, s1) = (sp.s2, sp.s1);
        let phase = 2.0 * PI * I * (s1 * (x1p - x1) + s2 * (x2 - x2p) + I * q / 2.0 * (x2 + x2p - x1 - x1p) + s1 * s2 + q * q / 4.0);
        let alt = phase.exp() * s(q / 2.0 + I * (0.5 * (s1 + s2) + x2 - x1)) / shifted(q + I * (0.5 * (s1 - s2) + x2 - x1p))
            * s(q / 2.0 + I * (-0.5 * (s1 + s2) + x2p - x1p))
            / shifted(q + I * (0.5 * (s2 - s1) + x2p - x1));
        assert!((direct - alt).norm() < 1e-10 * direct.norm(), "{direct} {alt}");
    }

    #[test]
    fn momentum_kernel_pole() {
        let m = m7();
        let sp = SpinPair::new(0.5, 0.3);
        let fit = momentum_pole_fit(0.2, -0.4, sp, 1e-3, &m).unwrap();
        assert!((fit.order - 1.0).abs() < 5e-3, "{}", fit.order);
        assert!((fit.residue + 1.0 / (2.0 * PI)).norm() < 1e-8, "{}", fit.residue);
        // at tau = 0 the regularized value scales like 1/eta
        assert!(matches!(r_kernel_momentum_reduced(0.2, -0.4, 0.0, sp, 1e-6, &m), Err(Error::UnstableEta(_))));
    }

    #[test]
    fn momentum_kernel_modulus_and_duality() {
        let m = m7();
        let sp = SpinPair::new(0.5, 0.3);
        for (k2, k1, tau) in [(0.2, -0.4, 0.7), (-1.1, 0.3, -0.35), (0.0, 0.9, 1.6)] {
            let v = r_kernel_momentum_reduced(k2, k1, tau, sp, 1e-9, &m).unwrap();
            let g = inv_gb_shifted(tau, 5e-10, &m).unwrap();
            assert!((v.norm() - g.norm()).abs() < 1e-10 * g.norm());
            let d = r_kernel_momentum_reduced(k2, k1, tau, sp, 1e-9, &m.dual()).unwrap();
            assert!((v - d).norm() < 1e-9 * v.norm());
        }
    }

    fn state(g: &Grid) -> MomentumState {
        MomentumState::from_position(g, |x2, x1| Complex64::from((-(x2 - 0.2).powi(2) / 1.2 - (x1 + 0.1).powi(2) / 1.0).exp())).unwrap()
    }

    #[test]
    fn momentum_action_is_nearly_unitary_and_matches_the_lattice() {
        let m = m7();
        let sp = SpinPair::new(0.5, 0.3);
        let g = Grid::new(64, (128f64).sqrt()).unwrap();
        let psi = state(&g);
        let out = apply_r_momentum(&psi, sp, &m).unwrap();
        let defect = (out.norm() / psi.norm() - 1.0).abs();
        assert!(defect < 5e-3, "{defect}");
        // two independent constructions of the same operator, converging together
        let lattice_gap = |g: &Grid| {
            let psi = state(g);
            let out = apply_r_momentum(&psi, sp, &m).unwrap();
            let r = r_lattice(sp.s2, sp.s1, g, &m).unwrap();
            let mp = Multi::new(g, 2);
            diff_norm(&mp.to_momentum(&r.apply(&mp.to_position(&psi.values))), &out.values)
        };
        let coarse = lattice_gap(&g);
        let fine = lattice_gap(&Grid::new(128, 16.0).unwrap());
        assert!(coarse < 8e-2 && fine < 5e-3, "{coarse} {fine}");
    }

    #[test]
    fn momentum_action_commutes_with_total_k() {
        let m = m7();
        let sp = SpinPair::new(0.5, 0.3);
        let g = Grid::new(32, 8.0).unwrap();
        let psi = state(&g);
        let dk = |s: &MomentumState| -> CVec {
            let n = g.n;
            s.values.iter().enumerate().map(|(i, v)| v * (-PI * m.b.re * g.k[i / n]).exp()).collect()
        };
        let a = apply_r_momentum_tol(&MomentumState::new(&g, dk(&psi)).unwrap(), sp, &m, 1.0).unwrap();
        let b = dk(&apply_r_momentum_tol(&psi, sp, &m, 1.0).unwrap());
        assert!(diff_norm(&a.values, &b) < 1e-13);
    }
}

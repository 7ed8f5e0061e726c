//! Scalar integral identities: the b-beta integral, Fourier transforms of g_b,
//! the density rho and b-binomial coefficients.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::opsim::grid::{diff_norm, norm, CVec};
use crate::opsim::weyl::WeylPair;
use crate::quadrature::{contour_residue, integrate_line, ContourSpec};
use crate::specfun::{gb, log_gb_big, Gb};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A quadrature value next to the closed form it should reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub numeric: Complex64,
    pub closed_form: Complex64,
    pub err_est: f64,
}

impl Comparison {
    pub fn residual(&self) -> f64 {
        (self.numeric - self.closed_form).norm() / self.closed_form.norm().max(1e-300)
    }
}

/// G_b(a) / G_b(c) through logarithms, safe where both factors are huge.
fn gb_ratio(a: Complex64, c: Complex64, m: &Modulus) -> Result<Complex64> {
    Ok((log_gb_big(a, m)?.value - log_gb_big(c, m)?.value).exp())
}

/// int dtau e^{-2 pi tau beta} G_b(alpha + i tau) / G_b(Q + i tau) on a line above tau = 0,
/// compared with G_b(alpha) G_b(beta) / G_b(alpha + beta).
pub fn beta_integral(alpha: Complex64, beta: Complex64, m: &Modulus) -> Result<Comparison> {
    let q = m.qq();
    if !(alpha.re > 0.0 && beta.re > 0.0 && (alpha + beta).re < q.re) {
        return Err(Error::OutOfStrip(format!("alpha = {alpha}, beta = {beta}")));
    }
    let eta = 0.5 * alpha.re.min(0.5);
    let f = |tau: Complex64| -> Complex64 {
        match gb_ratio(alpha + I * tau, q + I * tau, m) {
            Ok(r) => (-2.0 * PI * tau * beta).exp() * r,
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    };
    let spec = ContourSpec::new(eta, 4.0).with_tol(1e-11).with_abs_tol(1e-14);
    let r = integrate_line(&f, &spec)?;
    if !r.value.is_finite() {
        return Err(Error::NonConvergent("beta integrand hit a pole".into()));
    }
    let closed = Gb(alpha, m)?.value * Gb(beta, m)?.value / Gb(alpha + beta, m)?.value;
    Ok(Comparison { numeric: r.value, closed_form: closed, err_est: r.err_est })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FourierSign {
    /// b int dt e^{2 pi i b t r} e^{-pi i b^2 t^2} / G_b(Q + i b t) = g_b(e^{2 pi b r})
    Plus,
    /// b int dt e^{2 pi i b t r} e^{-pi b Q t} / G_b(Q + i b t) = 1 / g_b(e^{2 pi b r})
    Minus,
}

/// Fourier transforms of 1/G_b(Q + ibt) against the two damping factors.
///
/// The oscillatory Gaussian e^{-pi i b^2 t^2} does not decay on the real line,
/// so the half-line carrying it is tilted into the lower half plane (where it
/// becomes a decaying Gaussian); the poles of 1/G_b(Q+ibt) sit on the negative
/// imaginary axis and are never crossed.
pub fn fourier_gb(r: f64, m: &Modulus, sign: FourierSign) -> Result<Comparison> {
    let b = m.b;
    let q = m.qq();
    let f = |t: Complex64| -> Complex64 {
        let lg = match log_gb_big(q + I * b * t, m) {
            Ok(v) => v.value,
            Err(_) => return Complex64::new(f64::NAN, f64::NAN),
        };
        let damp = match sign {
            FourierSign::Plus => -I * PI * b * b * t * t,
            FourierSign::Minus => -PI * b * q * t,
        };
        b * (2.0 * PI * I * b * t * r + damp - lg).exp()
    };
    let eta = 0.1 * m.strip_width();
    let tilt = 0.25;
    let spec = match sign {
        FourierSign::Plus => ContourSpec::new(eta, 4.0).with_slopes(0.0, -tilt),
        FourierSign::Minus => ContourSpec::new(eta, 4.0).with_slopes(tilt, 0.0),
    }
    .with_tol(1e-11)
    .with_abs_tol(1e-14);
    let res = integrate_line(&f, &spec)?;
    let g = gb(Complex64::new((2.0 * PI * b.re * r).exp(), 0.0), m)?.value;
    let closed = match sign {
        FourierSign::Plus => g,
        FourierSign::Minus => 1.0 / g,
    };
    Ok(Comparison { numeric: res.value, closed_form: closed, err_est: res.err_est })
}

/// rho(t) = b e^{-pi i b^2 t^2} / G_b(Q + ibt) * (2 sin pi b^2)^{2it}.
pub fn rho(t: Complex64, m: &Modulus) -> Result<Complex64> {
    let b = m.b;
    let lg = log_gb_big(m.qq() + I * b * t, m)?.value;
    let s = (2.0 * (PI * b * b).sin()).ln();
    Ok(b * (-I * PI * b * b * t * t - lg + 2.0 * I * t * s).exp())
}

/// |[it+1]_q rho(t-i) - 2i q^{it} sin(pi b^2) rho(t)| / |rho(t)|.
pub fn rho_funceq_residual(t: Complex64, m: &Modulus) -> Result<f64> {
    let b2 = m.b * m.b;
    let r0 = rho(t, m)?;
    let r1 = rho(t - I, m)?;
    let lhs = m.qnum(I * t + 1.0) * r1;
    let rhs = 2.0 * I * (I * PI * b2 * I * t).exp() * (PI * b2).sin() * r0;
    Ok((lhs - rhs).norm() / r0.norm())
}

/// The b-binomial coefficient
/// e^{2 pi i b^2 tau (t - tau)} G_b(Q + ibt) / (G_b(Q + ibt - ib tau) G_b(Q + ib tau)).
pub fn bbinom(t: Complex64, tau: Complex64, m: &Modulus) -> Result<Complex64> {
    let b = m.b;
    let q = m.qq();
    let l = log_gb_big(q + I * b * t, m)?.value
        - log_gb_big(q + I * b * t - I * b * tau, m)?.value
        - log_gb_big(q + I * b * tau, m)?.value;
    Ok((2.0 * PI * I * b * b * tau * (t - tau) + l).exp())
}

/// Largest relative deviation in the two q-Pascal identities
/// B(t-i, tau) = q^{-2i tau} B(t, tau) + B(t, tau+i) = B(t, tau) + q^{2i(tau-t+i)} B(t, tau+i).
pub fn pascal_residual(t: Complex64, tau: Complex64, m: &Modulus) -> Result<f64> {
    let qp = |x: Complex64| (I * PI * m.b * m.b * x).exp();
    let lhs = bbinom(t - I, tau, m)?;
    let b0 = bbinom(t, tau, m)?;
    let b1 = bbinom(t, tau + I, m)?;
    let r1 = qp(-2.0 * I * tau) * b0 + b1;
    let r2 = b0 + qp(2.0 * I * (tau - t + I)) * b1;
    let scale = lhs.norm().max(b0.norm()).max(b1.norm());
    Ok((lhs - r1).norm().max((lhs - r2).norm()) / scale)
}

/// Residue of the b-binomial coefficient at tau = 0 by a small circle.
pub fn bbinom_residue_at_zero(t: Complex64, m: &Modulus) -> Result<Complex64> {
    let radius = 0.1 * (1.0f64).min(t.norm().max(0.05)).min(1.0 / (m.b.norm() * m.b.norm()));
    let f = |tau: Complex64| bbinom(t, tau, m).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    contour_residue(&f, Complex64::new(0.0, 0.0), radius)
}

/// Degenerate scalar surrogate v -> 0: the integral collapses onto the residue
/// at tau = 0 and must reproduce u^{it}; returns |-2 pi i b Res - 1|.
pub fn binomial_scalar_check(t: f64, m: &Modulus) -> Result<f64> {
    let res = bbinom_residue_at_zero(Complex64::new(t, 0.0), m)?;
    Ok((-2.0 * PI * I * m.b * res - 1.0).norm())
}

/// (u+v)^{it} psi against b int dtau B(t, tau) u^{i(t - tau)} v^{i tau} psi on a lattice Weyl pair.
///
/// The contour passes above the pole family of 1/G_b(Q + ib tau) (starting at tau = 0)
/// and below the family of 1/G_b(Q + ibt - ib tau) (starting at tau = t).
pub fn binomial_expansion_check(t: f64, m: &Modulus, w: &WeylPair, states: &[CVec]) -> Result<f64> {
    let g = &w.grid;
    let bb = w.b;
    if t == 0.0 {
        // the empty power: both sides are the identity
        return Ok(0.0);
    }
    let e = w.sum_eig();
    let eta = 0.15 * t.abs().min(1.0);
    // Im tau = eta + slope * u, with Im = -eta at u = t
    let slope = -2.0 * eta / t;
    let spec = if t > 0.0 { (0.0, slope) } else { (slope, 0.0) };
    let contour = ContourSpec::new(eta, 1.0).with_slopes(spec.0, spec.1);
    let tc = Complex64::new(t, 0.0);
    // fixed composite Gauss rule in u, refined until two levels agree
    let quad = |panels: usize, window: f64, psi: &[Complex64]| -> Result<CVec> {
        let (gx, gw) = crate::quadrature::gl16();
        let h = 2.0 * window / panels as f64;
        let mut acc = vec![Complex64::new(0.0, 0.0); g.n];
        for p in 0..panels {
            let a = -window + h * p as f64;
            for (xi, wi) in gx.iter().zip(gw) {
                let u = a + 0.5 * h * (xi + 1.0);
                let (tau, dt) = contour.point(u);
                let coef = m.b * bbinom(tc, tau, m)? * dt * (wi * 0.5 * h);
                if coef.norm() < 1e-30 {
                    continue;
                }
                // v^{i tau} = e^{2 pi i b tau p}, u^{i(t - tau)} = e^{2 pi i b (t - tau) x}
                let vt: CVec = g.k.iter().map(|&k| (2.0 * PI * I * bb * tau * k).exp()).collect();
                let ut: CVec = g.x.iter().map(|&x| (2.0 * PI * I * bb * (tc - tau) * x).exp()).collect();
                let y = g.apply_x(&ut, &g.apply_p(&vt, psi));
                for (s, v) in acc.iter_mut().zip(&y) {
                    *s += coef * v;
                }
            }
        }
        Ok(acc)
    };
    let window = 12.0 / (m.qq().re * bb).max(0.2) + t.abs();
    let mut worst: f64 = 0.0;
    for psi in states {
        let exact = e.apply(|l| if l > 0.0 { (I * t * l.ln()).exp() } else { Complex64::new(0.0, 0.0) }, psi);
        let mut panels = 64;
        let mut prev = quad(panels, window, psi)?;
        let mut cur;
        loop {
            panels *= 2;
            cur = quad(panels, window, psi)?;
            if diff_norm(&cur, &prev) < 1e-9 * norm(psi) || panels >= 1024 {
                break;
            }
            prev = cur;
        }
        worst = worst.max(diff_norm(&cur, &exact) / norm(psi));
    }
    Ok(worst)
}

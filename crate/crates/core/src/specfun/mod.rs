//! The quantum dilogarithm family G_b, g_b, w_b.
//!
//! G_b is computed on the central strip |Re z - Q/2| <= w/2, w = min(Re b, Re 1/b),
//! from the integral
//!   Phi(alpha) = int_{R + i0} e^{t alpha} / (4 t sinh(bt/2) sinh(t/2b)) dt,
//!   G_b(Q/2 + alpha) = conj(zeta_b) e^{-Phi(alpha)},   g_b(x) = e^{Phi(Log x / 2 pi i b)},
//! and continued to the rest of the plane with the two shift equations.

pub mod checks;
pub mod kernel;
pub mod rule;

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::quadrature::{contour_residue_tol, integrate_line, ContourSpec};
use kernel::{cexpm1, log_gb_kernel};
use rule::{tier_for, FastRule, LOWER_SWITCH, TIERS};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Distance to the pole lattice below which evaluation is refused.
pub const POLE_TOL: f64 = 1e-6;
/// Default cap on the number of continuation steps.
pub const MAX_LADDER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Integral,
    Ladder,
    Product,
}

/// A value with an absolute error estimate and the route used to compute it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionValue {
    pub value: Complex64,
    pub err_est: f64,
    pub method: Method,
    pub ladder_steps: usize,
}

impl FunctionValue {
    fn integral(value: Complex64, err_est: f64) -> Self {
        FunctionValue { value, err_est, method: Method::Integral, ladder_steps: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    Pole,
    Zero,
}

/// Points base + n g1 + m g2 with n, m >= 0, all of order one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleZeroLattice {
    pub kind: LatticeKind,
    pub base: Complex64,
    pub generators: (Complex64, Complex64),
    pub order: u32,
}

impl PoleZeroLattice {
    pub fn gb_poles(m: &Modulus) -> Self {
        PoleZeroLattice { kind: LatticeKind::Pole, base: 0.0.into(), generators: (-m.b, -1.0 / m.b), order: 1 }
    }

    pub fn gb_zeros(m: &Modulus) -> Self {
        PoleZeroLattice { kind: LatticeKind::Zero, base: m.qq(), generators: (m.b, 1.0 / m.b), order: 1 }
    }

    pub fn wb_poles(m: &Modulus) -> Self {
        PoleZeroLattice {
            kind: LatticeKind::Pole,
            base: -I * m.qq() * 0.5,
            generators: (-I * m.b, -I / m.b),
            order: 1,
        }
    }

    pub fn wb_zeros(m: &Modulus) -> Self {
        PoleZeroLattice {
            kind: LatticeKind::Zero,
            base: I * m.qq() * 0.5,
            generators: (I * m.b, I / m.b),
            order: 1,
        }
    }

    pub fn point(&self, n: usize, m: usize) -> Complex64 {
        self.base + self.generators.0 * n as f64 + self.generators.1 * m as f64
    }

    pub fn enumerate(&self, nmax: usize, mmax: usize) -> Vec<(usize, usize, Complex64)> {
        let mut v = Vec::with_capacity((nmax + 1) * (mmax + 1));
        for n in 0..=nmax {
            for m in 0..=mmax {
                v.push((n, m, self.point(n, m)));
            }
        }
        v
    }

    /// Closest lattice point to z as (n, m, distance).
    pub fn nearest(&self, z: Complex64) -> (usize, usize, f64) {
        let (g1, g2) = self.generators;
        let reach = (z - self.base).norm();
        let n_max = (reach / g1.norm()).ceil() as usize + 2;
        let m_max = (reach / g2.norm()).ceil() as usize + 2;
        let mut best = (0, 0, f64::INFINITY);
        for n in 0..=n_max {
            for m in 0..=m_max {
                let d = (z - self.point(n, m)).norm();
                if d < best.2 {
                    best = (n, m, d);
                }
            }
        }
        best
    }
}

/// Default contour for the adaptive g_b integral: Im t = w/4.
pub fn default_contour(m: &Modulus) -> ContourSpec {
    ContourSpec::new(m.strip_width() / 4.0, 20.0).with_tol(1e-13).with_abs_tol(1e-15)
}

fn residue_at_origin(alpha: Complex64, m: &Modulus) -> Complex64 {
    let b2 = m.b * m.b;
    alpha * alpha * 0.5 - (b2 + 1.0 / b2) / 24.0
}

/// log g_b(x) by adaptive quadrature on the given line.
///
/// A line below the origin is allowed; the residue at t = 0 is then added so
/// the value always corresponds to the contour passing above the pole.
pub fn log_gb_integral(x: Complex64, m: &Modulus, contour: &ContourSpec) -> Result<FunctionValue> {
    if x.im == 0.0 && x.re <= 0.0 {
        return Err(Error::BranchViolation);
    }
    let alpha = x.ln() / (2.0 * PI * I * m.b);
    phi_integral(alpha, m, contour)
}

/// Phi(alpha) by adaptive quadrature.
pub fn phi_integral(alpha: Complex64, m: &Modulus, contour: &ContourSpec) -> Result<FunctionValue> {
    let b = m.b;
    let binv = 1.0 / b;
    let qh = m.qq() * 0.5;
    if alpha.re.abs() >= 0.5 * (b.re + binv.re) {
        return Err(Error::OutOfStrip(format!("Re alpha = {} outside convergence region", alpha.re)));
    }
    if contour.eta == 0.0 {
        return Err(Error::ConfigInvalid("the g_b contour must avoid t = 0".into()));
    }
    let f = |t: Complex64| log_gb_kernel(t, alpha, b, binv, qh);
    let r = integrate_line(&f, contour)?;
    let mut v = r.value;
    if contour.eta < 0.0 {
        v -= 2.0 * PI * I * residue_at_origin(alpha, m);
    }
    Ok(FunctionValue::integral(v, r.err_est))
}

/// Phi(alpha) for Im alpha well above zero, from the residues at t = 2 pi i n / b and 2 pi i n b.
///
/// Returns None when the series is slow or the two pole families come too close.
pub fn phi_series(alpha: Complex64, m: &Modulus) -> Option<(Complex64, f64)> {
    let b = m.b;
    let binv = 1.0 / b;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for (s, r) in [(binv, binv * binv), (b, b * b)] {
        // terms e^{2 pi i n alpha s} / sin(pi n r)
        let rate = 2.0 * PI * (alpha * s).im;
        if rate < 3.5 {
            return None;
        }
        let nmax = (42.0 / rate).ceil() as usize;
        for n in 1..=nmax {
            let nf = n as f64;
            let den = (PI * nf * r).sin();
            if den.norm() < 1e-3 {
                return None;
            }
            let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            let t = (2.0 * PI * I * nf * alpha * s).exp() * sign / (4.0 * PI * nf * den);
            acc += t;
            mag += t.norm();
        }
    }
    Some((2.0 * PI * I * acc, 2.0 * PI * mag * f64::EPSILON * 10.0))
}

/// Phi(alpha) from the cached rules; alpha must lie in the convergence region.
pub fn phi_fast(alpha: Complex64, m: &Modulus) -> (Complex64, f64) {
    if alpha.im > 0.0 {
        if let Some(r) = phi_series(alpha, m) {
            return r;
        }
    } else if let Some((v, e)) = phi_series(-alpha, m) {
        return (-v - 2.0 * PI * I * residue_at_origin(alpha, m), e);
    }
    let lower = alpha.im < -LOWER_SWITCH;
    // on the lower line: Phi(alpha) = -Phi'(-alpha) - 2 pi i Res_0, with Phi' on a second line
    let a = if lower { -alpha } else { alpha };
    let y = a.im.abs();
    let (v, e) = match tier_for(y) {
        Some(t) => {
            let r = m.rule(t + if lower { TIERS.len() } else { 0 });
            let (v, e) = r.eval(a);
            (v, e + r.calib_err)
        }
        None => {
            let r = FastRule::build(m, y * 1.05, lower);
            let (v, e) = r.eval(a);
            (v, e + r.calib_err)
        }
    };
    if lower {
        (-v - 2.0 * PI * I * residue_at_origin(alpha, m), e)
    } else {
        (v, e)
    }
}

/// log G_b(z) for z on the central strip.
fn log_gb_strip(z: Complex64, m: &Modulus) -> (Complex64, f64) {
    let alpha = z - m.qq() * 0.5;
    let (phi, e) = phi_fast(alpha, m);
    (-m.zeta.ln() - phi, e)
}

fn check_pole(z: Complex64, m: &Modulus) -> Result<()> {
    let (n, k, d) = PoleZeroLattice::gb_poles(m).nearest(z);
    if d < POLE_TOL {
        return Err(Error::AtPole(format!("{z} (n={n}, m={k})")));
    }
    Ok(())
}

/// log G_b(z) continued from the strip, returning (log value, abs err of log, steps).
pub fn log_gb_big(z: Complex64, m: &Modulus) -> Result<FunctionValue> {
    log_gb_ladder(z, m, MAX_LADDER)
}

pub fn log_gb_ladder(z: Complex64, m: &Modulus, max_steps: usize) -> Result<FunctionValue> {
    check_pole(z, m)?;
    let w = m.strip_width();
    let qh = m.qq() * 0.5;
    let (s_small, s_big) = if m.b.re <= (1.0 / m.b).re { (m.b, 1.0 / m.b) } else { (1.0 / m.b, m.b) };
    let mut cur = z;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut steps = 0usize;
    let mut amp = 0.0;
    // factor_log(s, x) = log(1 - e^{2 pi i s x})
    let factor_log = |s: Complex64, x: Complex64| (-cexpm1(2.0 * PI * I * s * x)).ln();
    while (cur - qh).re > 0.5 * w {
        let d = (cur - qh).re;
        let s = if d - s_big.re >= -0.5 * w { s_big } else { s_small };
        cur -= s;
        acc += factor_log(s, cur);
        amp += 1.0;
        steps += 1;
        if steps > max_steps {
            return Err(Error::LadderOverflow(max_steps));
        }
    }
    while (cur - qh).re < -0.5 * w {
        let d = (cur - qh).re;
        let s = if d + s_big.re <= 0.5 * w { s_big } else { s_small };
        acc -= factor_log(s, cur);
        cur += s;
        amp += 1.0;
        steps += 1;
        if steps > max_steps {
            return Err(Error::LadderOverflow(max_steps));
        }
    }
    let (lg, e) = log_gb_strip(cur, m);
    let err = e + amp * 8.0 * f64::EPSILON * (1.0 + acc.norm());
    Ok(FunctionValue {
        value: lg + acc,
        err_est: err,
        method: if steps > 0 { Method::Ladder } else { Method::Integral },
        ladder_steps: steps,
    })
}

fn exp_value(lg: FunctionValue) -> FunctionValue {
    let v = lg.value.exp();
    FunctionValue { value: v, err_est: v.norm() * lg.err_est.max(f64::EPSILON), ..lg }
}

/// G_b(z) anywhere off the pole lattice.
#[allow(non_snake_case)]
pub fn Gb(z: Complex64, m: &Modulus) -> Result<FunctionValue> {
    log_gb_big(z, m).map(exp_value)
}

/// G_b(z) with an explicit ladder cap.
#[allow(non_snake_case)]
pub fn Gb_with(z: Complex64, m: &Modulus, max_steps: usize) -> Result<FunctionValue> {
    log_gb_ladder(z, m, max_steps).map(exp_value)
}

/// 1 / G_b(z), finite at the poles of G_b' shifted copies; refused at zeros of G_b.
#[allow(non_snake_case)]
pub fn inv_Gb(z: Complex64, m: &Modulus) -> Result<FunctionValue> {
    let zeros = PoleZeroLattice::gb_zeros(m);
    let (_, _, d) = zeros.nearest(z);
    if d < POLE_TOL {
        return Err(Error::AtPole(format!("1/G_b at zero {z}")));
    }
    let lg = log_gb_big(z, m)?;
    let v = (-lg.value).exp();
    Ok(FunctionValue { value: v, err_est: v.norm() * lg.err_est.max(f64::EPSILON), ..lg })
}

/// log g_b(x) = log conj(zeta_b) - log G_b(Q/2 + Log x / (2 pi i b)).
pub fn log_gb_small(x: Complex64, m: &Modulus) -> Result<FunctionValue> {
    if x.im == 0.0 && x.re <= 0.0 {
        return Err(Error::BranchViolation);
    }
    let z = m.qq() * 0.5 + x.ln() / (2.0 * PI * I * m.b);
    let lg = log_gb_big(z, m)?;
    Ok(FunctionValue { value: -m.zeta.ln() - lg.value, ..lg })
}

/// g_b(x) = conj(zeta_b) / G_b(Q/2 + Log x / (2 pi i b)).
pub fn gb(x: Complex64, m: &Modulus) -> Result<FunctionValue> {
    log_gb_small(x, m).map(exp_value)
}

/// g_b on the positive half-line, where it has unit modulus.
pub fn gb_pos(x: f64, m: &Modulus) -> Result<Complex64> {
    Ok(gb(Complex64::new(x, 0.0), m)?.value)
}

/// log w_b(x).
pub fn log_wb(x: Complex64, m: &Modulus) -> Result<FunctionValue> {
    let (_, _, d) = PoleZeroLattice::wb_poles(m).nearest(x);
    if d < POLE_TOL {
        return Err(Error::AtPole(format!("w_b at {x}")));
    }
    let q = m.qq();
    let lg = log_gb_big(q * 0.5 - I * x, m)?;
    Ok(FunctionValue { value: lg.value + I * PI * 0.5 * (q * q / 4.0 + x * x), ..lg })
}

/// w_b(x) = e^{(i pi / 2)(Q^2/4 + x^2)} G_b(Q/2 - i x).
pub fn wb(x: Complex64, m: &Modulus) -> Result<FunctionValue> {
    log_wb(x, m).map(exp_value)
}

/// G_b from the truncated double product (valid for Im b^2 > 0).
pub fn gb_product(x: Complex64, m: &Modulus, n_terms: usize) -> Result<FunctionValue> {
    let b = m.b;
    let b2 = b * b;
    if !(b2.im > 0.0) {
        return Err(Error::WrongRegime);
    }
    let binv = 1.0 / b;
    let mut lg = -m.zeta.ln();
    let mut round = 0.0;
    let (mut last_num, mut last_den) = (0.0, 0.0);
    for n in 0..n_terms {
        if n >= 1 {
            let y = 2.0 * PI * I * binv * (x - binv * n as f64);
            let t = -cexpm1(y);
            lg += t.ln();
            last_num = y.exp().norm();
        }
        let y = 2.0 * PI * I * b * (x + b * n as f64);
        lg -= (-cexpm1(y)).ln();
        last_den = y.exp().norm();
        round += 4.0 * f64::EPSILON;
    }
    let r_num = (2.0 * PI * (1.0 / b2).im).exp();
    let r_den = (-2.0 * PI * b2.im).exp();
    let tail = 2.0 * (last_num * r_num / (1.0 - r_num) + last_den * r_den / (1.0 - r_den));
    let v = lg.exp();
    Ok(FunctionValue {
        value: v,
        err_est: v.norm() * (tail + round),
        method: Method::Product,
        ladder_steps: 0,
    })
}

/// Neville extrapolation to h = 0 of samples f(h_k).
fn neville_zero(h: &[f64], f: &[Complex64]) -> (Complex64, f64) {
    let n = h.len();
    let mut p = f.to_vec();
    let mut prev_top = p[0];
    let mut change = f64::INFINITY;
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i] * (0.0 - h[i + k]) - p[i + 1] * (0.0 - h[i])) / (h[i] - h[i + k]);
        }
        change = (p[0] - prev_top).norm();
        prev_top = p[0];
    }
    (p[0], change)
}

/// lim_{x -> 0} x G_b(x) by polynomial extrapolation of samples x_k = 0.2 / 2^k.
#[allow(non_snake_case)]
pub fn limit_xGb(m: &Modulus) -> Result<FunctionValue> {
    limit_xgb_with(m, |x| Gb(x, m))
}

/// The same limit with a caller-supplied G_b evaluator (e.g. the product form).
pub fn limit_xgb_with<F>(m: &Modulus, eval: F) -> Result<FunctionValue>
where
    F: Fn(Complex64) -> Result<FunctionValue>,
{
    let h0 = 0.2 * m.strip_width().min(1.0);
    let mut hs = Vec::new();
    let mut fs = Vec::new();
    let mut err_samples: f64 = 0.0;
    for k in 0..9 {
        let h = h0 / 2f64.powi(k);
        let x = Complex64::new(h, 0.0);
        let g = eval(x)?;
        hs.push(h);
        fs.push(x * g.value);
        err_samples = err_samples.max(h * g.err_est);
    }
    let (v, change) = neville_zero(&hs, &fs);
    let err = change + 10.0 * err_samples;
    if !(err < 1e-4) {
        return Err(Error::NonConvergent(format!("extrapolation change {change:e}")));
    }
    Ok(FunctionValue { value: v, err_est: err, method: Method::Ladder, ladder_steps: 0 })
}

/// Residue of 1/G_b(Q + z) at z = n b + m / b.
#[allow(non_snake_case)]
pub fn residue_inv_Gb(n: usize, m_: usize, m: &Modulus) -> Result<Complex64> {
    let mut r = Complex64::new(-1.0 / (2.0 * PI), 0.0);
    for k in 1..=n {
        let f = -cexpm1(2.0 * PI * I * m.b * m.b * k as f64);
        if f.norm() < 1e-12 {
            return Err(Error::Degenerate(format!("1 - q^{} vanishes", 2 * k)));
        }
        r /= f;
    }
    for l in 1..=m_ {
        let f = -cexpm1(2.0 * PI * I * l as f64 / (m.b * m.b));
        if f.norm() < 1e-12 {
            return Err(Error::Degenerate(format!("1 - qtilde^-{} vanishes", 2 * l)));
        }
        r /= f;
    }
    Ok(r)
}

/// Residue of 1/G_b(Q + z) at z = n b + m / b by a small circle.
#[allow(non_snake_case)]
pub fn residue_inv_Gb_numeric(n: usize, m_: usize, m: &Modulus, radius: f64) -> Result<Complex64> {
    let z0 = m.b * n as f64 + m_ as f64 / m.b;
    let q = m.qq();
    let f = |z: Complex64| inv_Gb(q + z, m).map(|v| v.value).unwrap_or(Complex64::new(f64::NAN, 0.0));
    contour_residue_tol(&f, z0, radius, 1e-12)
}

#[cfg(test)]
mod tests;

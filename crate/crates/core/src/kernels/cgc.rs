//! Clebsch-Gordan kernels in position space and their reduced Fourier transforms.
//!
//! Both evaluators use the kernel whose left label is -s3: `cgc_position(.., s3, s2, s1, ..)`
//! is C[-s3; x3 | s2; x2 | s1; x1]. [`cgc_momentum_labeled`] takes the left label directly.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::{h_s, HConvention, I};
use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::quadrature::contour_residue_tol;
use crate::specfun::log_wb;

fn lwb(x: Complex64, m: &Modulus) -> Result<Complex64> {
    Ok(log_wb(x, m)?.value)
}

/// Spin combinations of the kernel with left label -s3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgcParams {
    pub s3: f64,
    pub s2: f64,
    pub s1: f64,
    pub sigma32: f64,
    pub sigma31: f64,
    pub sigma21: f64,
    pub beta: Complex64,
    pub beta21: Complex64,
}

/// Shifts R_l, S_l of the momentum-space integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgcShifts {
    pub r: [Complex64; 3],
    pub s: [Complex64; 3],
}

impl CgcParams {
    pub fn new(s3: f64, s2: f64, s1: f64, m: &Modulus) -> Self {
        let q = m.qq();
        CgcParams {
            s3,
            s2,
            s1,
            sigma32: s1 - s2 - s3,
            sigma31: s2 - s3 - s1,
            sigma21: s3 - s2 - s1,
            beta: q / 2.0 + I * (s1 + s2 + s3),
            beta21: q / 2.0 + I * (s1 + s2 - s3),
        }
    }

    /// (y32, y31, y21).
    pub fn y(&self, x3: Complex64, x2: Complex64, x1: Complex64) -> [Complex64; 3] {
        let (s3, s2, s1) = (self.s3, self.s2, self.s1);
        [x2 - x3 + 0.5 * (s3 + s2), x3 - x1 + 0.5 * (s3 + s1), x2 - x1 + 0.5 * (s2 + s1 - 2.0 * s3)]
    }

    pub fn sigmas(&self) -> [f64; 3] {
        [self.sigma32, self.sigma31, self.sigma21]
    }

    pub fn shifts(&self, k2: Complex64, k1: Complex64, m: &Modulus) -> CgcShifts {
        let iq = I * m.qq() / 2.0;
        let r = [-self.s2 + k2, -self.s1 - k1, Complex64::from(self.s3 - self.s2 - self.s1)];
        CgcShifts { r, s: [iq + r[0] - self.sigma32, iq + r[1] - self.sigma31, iq] }
    }
}

/// D_b(sigma; y) = w_b(y - iQ/2) / w_b(y + sigma), as a logarithm.
fn log_db(sigma: f64, y: Complex64, m: &Modulus) -> Result<Complex64> {
    Ok(lwb(y - I * m.qq() / 2.0, m)? - lwb(y + sigma, m)?)
}

/// C[-s3; x3 | s2; x2 | s1; x1] at regularization epsilon, with the h_s = s^2 + Q^2/4 prefactor.
pub fn cgc_position(x3: Complex64, x2: Complex64, x1: Complex64, s3: f64, s2: f64, s1: f64, epsilon: f64, m: &Modulus) -> Result<Complex64> {
    cgc_position_with(x3, x2, x1, s3, s2, s1, epsilon, HConvention::Plus, m)
}

#[allow(clippy::too_many_arguments)]
pub fn cgc_position_with(
    x3: Complex64,
    x2: Complex64,
    x1: Complex64,
    s3: f64,
    s2: f64,
    s1: f64,
    epsilon: f64,
    conv: HConvention,
    m: &Modulus,
) -> Result<Complex64> {
    let p = CgcParams::new(s3, s2, s1, m);
    let h = |s| h_s(s, conv, m);
    let mut acc = -0.5 * PI * I * (h(s3) - h(s2) - h(s1));
    for (sig, y) in p.sigmas().iter().zip(p.y(x3, x2, x1)) {
        acc += log_db(*sig, y + I * epsilon, m)?;
    }
    Ok(acc.exp())
}

/// Contour prescription for the momentum-space integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CgcContour {
    /// Every pole of w_b(s + R_l) below the contour, every zero of w_b(s + S_l) above it.
    Separating,
    /// The horizontal line just above the real axis.
    Literal,
}

/// log of e^{-pi s beta} prod_l w_b(s + R_l) / w_b(s + S_l).
fn log_integrand(s: Complex64, beta: Complex64, sh: &CgcShifts, m: &Modulus) -> Result<Complex64> {
    let mut acc = -PI * s * beta;
    for l in 0..3 {
        acc += lwb(s + sh.r[l], m)? - lwb(s + sh.s[l], m)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy)]
struct Pole {
    z: Complex64,
    // from a zero of w_b(s + S_l): belongs above a separating contour
    upper: bool,
}

fn pole_family(base: Complex64, upper: bool, lo: f64, hi: f64, m: &Modulus, out: &mut Vec<Pole>) {
    let b = m.b_re();
    let (bb, bi) = (b, 1.0 / b);
    let mut n = 0usize;
    loop {
        let mut any = false;
        let mut k = 0usize;
        loop {
            let d = n as f64 * bb + k as f64 * bi;
            let z = if upper { base + I * d } else { base - I * d };
            if (upper && z.im > hi) || (!upper && z.im < lo) {
                break;
            }
            any = true;
            if z.im >= lo && z.im <= hi {
                out.push(Pole { z, upper });
            }
            k += 1;
        }
        if !any {
            break;
        }
        n += 1;
    }
}

fn poles(sh: &CgcShifts, lo: f64, hi: f64, m: &Modulus) -> Vec<Pole> {
    let iq = I * m.qq() / 2.0;
    let mut out = Vec::new();
    for l in 0..3 {
        pole_family(-sh.s[l] + iq, true, lo, hi, m, &mut out);
        pole_family(-sh.r[l] - iq, false, lo, hi, m, &mut out);
    }
    out
}

/// Momentum-space integral of the kernel with left label -s3, without the prefactor.
fn cgc_integral(sh: &CgcShifts, beta: Complex64, contour: CgcContour, m: &Modulus) -> Result<Complex64> {
    let q = m.qq().re;
    let f = |s: Complex64| log_integrand(s, beta, sh, m).map(|v| v.exp());
    let all = poles(sh, -3.0 * q, 3.0 * q, m);
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            if a.upper != b.upper && (a.z - b.z).norm() < 1e-9 {
                return Err(Error::AtPole(format!("pinched contour at s = {}", a.z)));
            }
        }
    }
    // integration line: the widest horizontal gap between poles in [-Q, Q]
    let mut ims: Vec<f64> = all.iter().map(|p| p.z.im).filter(|y| y.abs() <= q).collect();
    ims.push(-q);
    ims.push(q);
    ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (mut c, mut gap) = (0.0, -1.0);
    for w in ims.windows(2) {
        if w[1] - w[0] > gap {
            gap = w[1] - w[0];
            c = 0.5 * (w[0] + w[1]);
        }
    }
    let d = 0.5 * gap;
    if d < 1e-3 {
        return Err(Error::AtPole("no pole-free line in the strip".into()));
    }
    // residue corrections for poles on the wrong side of the line
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, p) in all.iter().enumerate() {
        let above_target = match contour {
            CgcContour::Separating => !p.upper,
            CgcContour::Literal => p.z.im <= 0.0,
        };
        // above_target: the target contour runs above the pole
        let above_line = p.z.im < c;
        if above_target == above_line {
            continue;
        }
        let near = all
            .iter()
            .enumerate()
            .filter(|(j, o)| *j != i && (o.z - p.z).norm() > 1e-9)
            .map(|(_, o)| (o.z - p.z).norm())
            .fold(f64::INFINITY, f64::min);
        let r = (0.4 * near).min(0.2);
        let res = contour_residue_tol(&|s: Complex64| f(s).unwrap_or(Complex64::new(f64::NAN, f64::NAN)), p.z, r, 1e-11)?;
        if !res.re.is_finite() || !res.im.is_finite() {
            return Err(Error::NonConvergent(format!("residue at {}", p.z)));
        }
        let dup = all[..i].iter().any(|o| o.upper == p.upper && (o.z - p.z).norm() <= 1e-9);
        if dup {
            continue;
        }
        acc += if above_target { -2.0 * PI * I * res } else { 2.0 * PI * I * res };
    }
    // trapezoid rule on Im s = c
    let centre = {
        let mut re: Vec<f64> = sh.r.iter().chain(&sh.s).map(|z| -z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        0.5 * (re[0] + re[5])
    };
    let h = (d / 6.0).min(0.1);
    let mut width = 14.0;
    loop {
        let n = (width / h).ceil() as i64;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut peak: f64 = 0.0;
        let mut edge: f64 = 0.0;
        for j in -n..=n {
            let v = f(Complex64::new(centre + j as f64 * h, c))?;
            peak = peak.max(v.norm());
            if j.abs() == n {
                edge = edge.max(v.norm());
            }
            sum += v;
        }
        if edge <= 1e-16 * peak {
            return Ok(acc + sum * h);
        }
        width += 8.0;
        if width > 46.0 {
            return Err(Error::NonConvergent(format!("integrand at the window edge is {edge:e} of the peak")));
        }
    }
}

/// Prefactor of the momentum-space kernel with left label -s3.
pub(crate) fn cgc_prefactor(p: &CgcParams, k2: Complex64, k1: Complex64, m: &Modulus) -> Result<Complex64> {
    let q = m.qq();
    let (s2, s1) = (p.s2, p.s1);
    let mut acc = -0.5 * PI * I * p.beta21 * p.beta + 0.5 * q * PI * (k1 - k2) + PI * I * (k1 * s2 - k2 * s1);
    for sig in p.sigmas() {
        acc -= lwb(Complex64::from(sig), m)?;
    }
    Ok(acc.exp())
}

/// The reduced momentum-space kernel with left label -s3 (delta(k1 + k2 - k3) removed).
pub fn cgc_momentum_reduced(k2: Complex64, k1: Complex64, s3: f64, s2: f64, s1: f64, contour: CgcContour, m: &Modulus) -> Result<Complex64> {
    if !m.is_real() {
        return Err(Error::WrongRegime);
    }
    let p = CgcParams::new(s3, s2, s1, m);
    let sh = p.shifts(k2, k1, m);
    Ok(cgc_prefactor(&p, k2, k1, m)? * cgc_integral(&sh, p.beta, contour, m)?)
}

/// Left label l3 in terms of the -s3 convention of the evaluators.
pub fn flip_label(l3: f64) -> f64 {
    -l3
}

/// The reduced kernel with left label l3: slots (l3 | s2, k2 | s1, k1).
pub fn cgc_momentum_labeled(l3: f64, s2: f64, k2: Complex64, s1: f64, k1: Complex64, contour: CgcContour, m: &Modulus) -> Result<Complex64> {
    cgc_momentum_reduced(k2, k1, flip_label(l3), s2, s1, contour, m)
}

/// Which ordering of the tensor factors the residue is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Kernel with slots (-s3 | s1, k1 | s2, k2).
    Left,
    /// Kernel with slots (-s3 | s2, k2 | s1, k1).
    Right,
}

/// Point of the k2 pole shared by both orderings.
pub fn residue_point(s2: f64, m: &Modulus) -> Complex64 {
    -s2 + I * m.qq() / 2.0
}

/// Residue of 1 / w_b(s + iQ/2) at s = 0 and of w_b(x) at x = -iQ/2, by small circles.
fn base_residues(m: &Modulus) -> Result<(Complex64, Complex64)> {
    let iq = I * m.qq() / 2.0;
    let r = 0.2 * m.b_re().min(1.0 / m.b_re());
    let inv = contour_residue_tol(&|s: Complex64| (-lwb(s + iq, m).unwrap()).exp(), Complex64::new(0.0, 0.0), r, 1e-12)?;
    let dir = contour_residue_tol(&|x: Complex64| lwb(x, m).unwrap().exp(), -iq, r, 1e-12)?;
    Ok((inv, dir))
}

/// Radius of the k2 circle used for the residue at [`residue_point`].
pub const K2_CIRCLE: f64 = 0.1;

/// The contribution to the reduced kernel (left label -s3) of the small circle around the
/// pinched pole of the s integrand, as a function of k2: the s = 0 circle for [`Side::Left`],
/// the circle at the base pole of w_b(s + R_3) for [`Side::Right`].
pub fn pinched_part(side: Side, k2: Complex64, k1: f64, s3: f64, s2: f64, s1: f64, m: &Modulus) -> Result<Complex64> {
    let (rho_inv, rho_dir) = base_residues(m)?;
    pinched_part_with(side, k2, k1, s3, s2, s1, rho_inv, rho_dir, m)
}

#[allow(clippy::too_many_arguments)]
fn pinched_part_with(side: Side, k2: Complex64, k1: f64, s3: f64, s2: f64, s1: f64, rho_inv: Complex64, rho_dir: Complex64, m: &Modulus) -> Result<Complex64> {
    let iq = I * m.qq() / 2.0;
    let k1c = Complex64::from(k1);
    match side {
        Side::Left => {
            let p = CgcParams::new(s3, s1, s2, m);
            let sh = p.shifts(k1c, k2, m);
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..3 {
                acc += lwb(sh.r[l], m)?;
            }
            acc -= lwb(sh.s[0], m)? + lwb(sh.s[1], m)?;
            Ok(cgc_prefactor(&p, k1c, k2, m)? * 2.0 * PI * I * rho_inv * acc.exp())
        }
        Side::Right => {
            let p = CgcParams::new(s3, s2, s1, m);
            let sh = p.shifts(k2, k1c, m);
            let z = -sh.r[2] - iq;
            let mut acc = -PI * z * p.beta + lwb(z + sh.r[0], m)? + lwb(z + sh.r[1], m)?;
            for l in 0..3 {
                acc -= lwb(z + sh.s[l], m)?;
            }
            Ok(cgc_prefactor(&p, k2, k1c, m)? * -2.0 * PI * I * rho_dir * acc.exp())
        }
    }
}

/// 2 pi i Res_{k2 = -s2 + iQ/2} of the reduced kernel with left label -s3, from the part of the
/// s integral that is pinched at that point: the s = 0 circle for [`Side::Left`], the circle
/// at the base pole of w_b(s + R_3) for [`Side::Right`]. The remaining contour separates the
/// pinching pair and contributes nothing to the residue.
pub fn cgc_residue(side: Side, k1: f64, s3: f64, s2: f64, s1: f64, m: &Modulus) -> Result<Complex64> {
    if !m.is_real() {
        return Err(Error::WrongRegime);
    }
    let (rho_inv, rho_dir) = base_residues(m)?;
    let singular = |k2: Complex64| pinched_part_with(side, k2, k1, s3, s2, s1, rho_inv, rho_dir, m);
    let f = |k2: Complex64| singular(k2).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let r = contour_residue_tol(&f, residue_point(s2, m), K2_CIRCLE, 1e-12)?;
    if !r.re.is_finite() || !r.im.is_finite() {
        return Err(Error::NonConvergent("k2 circle met a singular point".into()));
    }
    Ok(2.0 * PI * I * r)
}

/// 2 pi i Res at k2 = -s2 + iQ/2 of the complete kernel (left label -s3) evaluated with the
/// given prescription, by a circle in k2. Slow; used to cross-check [`cgc_residue`].
pub fn cgc_residue_full(side: Side, k1: f64, s3: f64, s2: f64, s1: f64, contour: CgcContour, m: &Modulus) -> Result<Complex64> {
    let k1c = Complex64::from(k1);
    let c0 = residue_point(s2, m);
    // the integrand is analytic on the circle, so the periodic trapezoid rule converges geometrically
    let n = 48;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        let k2 = c0 + K2_CIRCLE * e;
        let v = match side {
            Side::Left => cgc_momentum_reduced(k1c, k2, s3, s1, s2, contour, m)?,
            Side::Right => cgc_momentum_reduced(k2, k1c, s3, s2, s1, contour, m)?,
        };
        acc += v * e;
    }
    Ok(2.0 * PI * I * acc * K2_CIRCLE / n as f64)
}

/// The closed forms e^{-+(pi i/2)(h3 - h2 - h1)} e^{-+(pi/2) Q k1} e^{-+pi i s2 k1}
/// w_b(k1 - s1) w_b(s3 + s1 - s2) / w_b(k1 + s3 - s2 + iQ/2), upper signs for [`Side::Left`].
pub fn cgc_residue_closed(side: Side, k1: f64, s3: f64, s2: f64, s1: f64, conv: HConvention, m: &Modulus) -> Result<Complex64> {
    let q = m.qq();
    let sg = if side == Side::Left { -1.0 } else { 1.0 };
    let h = |s| h_s(s, conv, m);
    let e = sg * (0.5 * PI * I * (h(s3) - h(s2) - h(s1)) + 0.5 * PI * q * k1 + PI * I * s2 * k1);
    let w = lwb(Complex64::from(k1 - s1), m)? + lwb(Complex64::from(s3 + s1 - s2), m)? - lwb(k1 + s3 - s2 + I * q / 2.0, m)?;
    Ok((e + w).exp())
}

/// Left residue times e^{pi Q k1} e^{2 pi i s2 k1}, divided by the right residue.
pub fn braiding_ratio(k1: f64, s3: f64, s2: f64, s1: f64, m: &Modulus) -> Result<Complex64> {
    let l = cgc_residue(Side::Left, k1, s3, s2, s1, m)?;
    let r = cgc_residue(Side::Right, k1, s3, s2, s1, m)?;
    let q = m.qq();
    Ok(l * (PI * q * k1 + 2.0 * PI * I * s2 * k1).exp() / r)
}

/// Relative residuals of the two conjugation symmetries of the position kernel, with left
/// labels in the -s3 convention of the evaluators:
/// conj C(-s3 | x3, x2, x1) = e^{-pi i h(s2)} C(-s1 | x1* - iQ/2, x2*, x3* - iQ/2) with spins (-s2, s3),
/// and = e^{-pi i h(s1)} C(-s2 | x2* + iQ/2, x3* + iQ/2, x1*) with spins (s3, -s1).
#[allow(clippy::too_many_arguments)]
pub fn position_conj_residuals(x3: Complex64, x2: Complex64, x1: Complex64, s3: f64, s2: f64, s1: f64, conv: HConvention, m: &Modulus) -> Result<[f64; 2]> {
    let iq = I * m.qq() / 2.0;
    let c = |a, b, cc, l3: f64, l2, l1| cgc_position_with(a, b, cc, flip_label(l3), l2, l1, 0.0, conv, m);
    let lhs = c(x3, x2, x1, s3, s2, s1)?.conj();
    let a = (-PI * I * h_s(s2, conv, m)).exp() * c(x1.conj() - iq, x2.conj(), x3.conj() - iq, s1, -s2, s3)?;
    let b = (-PI * I * h_s(s1, conv, m)).exp() * c(x2.conj() + iq, x3.conj() + iq, x1.conj(), s2, s3, -s1)?;
    Ok([(lhs - a).norm() / lhs.norm(), (lhs - b).norm() / lhs.norm()])
}

/// Relative residuals of the momentum-space conjugation symmetries of the reduced kernel
/// (labels as in [`cgc_momentum_labeled`], k3 = k1 + k2):
/// conj K(s3 | s2, k2 | s1, k1) = e^{pi Q (k1 - k3)} K(s1 | -s2, -k2 | s3, k3)
/// = e^{-pi Q (k2 - k3)} K(s2 | s3, k3 | -s1, -k1).
pub fn momentum_conj_residuals(k2: f64, k1: f64, s3: f64, s2: f64, s1: f64, m: &Modulus) -> Result<[f64; 2]> {
    let q = m.qq().re;
    let k3 = k1 + k2;
    let kk = |l3, a2, p2: f64, a1, p1: f64| cgc_momentum_labeled(l3, a2, Complex64::from(p2), a1, Complex64::from(p1), CgcContour::Separating, m);
    let lhs = kk(s3, s2, k2, s1, k1)?.conj();
    let a = (PI * q * (k1 - k3)).exp() * kk(s1, -s2, -k2, s3, k3)?;
    let b = (-PI * q * (k2 - k3)).exp() * kk(s2, s3, k3, -s1, -k1)?;
    Ok([(lhs - a).norm() / lhs.norm(), (lhs - b).norm() / lhs.norm()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{omega, omega_with};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_invariants() {
        let m = Modulus::real(0.7).unwrap();
        let p = CgcParams::new(0.3, 0.5, 0.2, &m);
        assert!((p.sigma32 + p.sigma31 + p.sigma21 + 1.0).abs() < 1e-15);
        let sh = p.shifts(c(0.1, 0.0), c(-0.4, 0.0), &m);
        let iq = I * m.qq() / 2.0;
        assert_eq!(sh.s[2], iq);
        assert!((sh.s[0] - sh.r[0] - (iq - p.sigma32)).norm() < 1e-15);
        assert!((sh.s[1] - sh.r[1] - (iq - p.sigma31)).norm() < 1e-15);
    }

    #[test]
    fn position_kernel_basics() {
        let m = Modulus::real(0.7).unwrap();
        let (x3, x2, x1) = (c(0.3, 0.0), c(-0.15, 0.0), c(0.42, 0.0));
        let a = cgc_position(x3, x2, x1, 0.3, 0.5, 0.2, 1e-7, &m).unwrap();
        let b = cgc_position(x3, x2, x1, 0.3, 0.5, 0.2, 5e-8, &m).unwrap();
        assert!((a - b).norm() < 1e-6 * a.norm());
        // the h prefactor is a phase for real spins
        let p = cgc_position_with(x3, x2, x1, 0.3, 0.5, 0.2, 1e-7, HConvention::Plus, &m).unwrap();
        let n = cgc_position_with(x3, x2, x1, 0.3, 0.5, 0.2, 1e-7, HConvention::Minus, &m).unwrap();
        assert!((p.norm() - n.norm()).abs() < 1e-12 * p.norm());
    }

    const TRIPLES: [(f64, f64, f64); 3] = [(0.3, 0.5, 0.2), (0.6, 0.5, 0.2), (0.3, 0.1, 0.7)];

    #[test]
    fn residues_match_closed_forms() {
        let m = Modulus::real(0.7).unwrap();
        for (s3, s2, s1) in TRIPLES {
            for k1 in [0.0, 0.37, -0.6] {
                for side in [Side::Left, Side::Right] {
                    let a = cgc_residue(side, k1, s3, s2, s1, &m).unwrap();
                    let e = cgc_residue_closed(side, k1, s3, s2, s1, HConvention::Plus, &m).unwrap();
                    assert!((a - e).norm() < 1e-8 * e.norm(), "{side:?} {a} {e}");
                }
                let l = cgc_residue(Side::Left, k1, s3, s2, s1, &m).unwrap();
                let r = cgc_residue(Side::Right, k1, s3, s2, s1, &m).unwrap();
                let w = (PI * m.qq() * k1 + 2.0 * PI * I * s2 * k1).exp();
                assert!(((l * w).norm() - r.norm()).abs() < 1e-10 * r.norm());
            }
        }
    }

    #[test]
    fn braiding_ratio_against_omega() {
        let m = Modulus::real(0.7).unwrap();
        let (s3, s2, s1) = TRIPLES[0];
        let r = braiding_ratio(0.37, s3, s2, s1, &m).unwrap();
        let plus = omega_with(s3, s2, s1, HConvention::Plus, &m);
        assert!((r / plus - 1.0).norm() < 1e-10);
        // the s^2 - Q^2/4 convention differs by the constant phase e^{i pi Q^2/2}
        let minus = omega(s3, s2, s1, &m);
        let q2 = (m.qq() * m.qq()).re;
        assert!((r / minus - (PI * I * q2 / 2.0).exp()).norm() < 1e-10);
    }

    #[test]
    fn full_integral_reproduces_the_split_residue() {
        let m = Modulus::real(0.7).unwrap();
        let (s3, s2, s1) = TRIPLES[0];
        let split = cgc_residue(Side::Right, 0.37, s3, s2, s1, &m).unwrap();
        let full = cgc_residue_full(Side::Right, 0.37, s3, s2, s1, CgcContour::Separating, &m).unwrap();
        assert!((split - full).norm() < 1e-8 * split.norm(), "{split} {full}");
        // a fixed line through the pinch leaves no residue on this side
        let lit = cgc_residue_full(Side::Right, 0.37, s3, s2, s1, CgcContour::Literal, &m).unwrap();
        assert!(lit.norm() < 1e-9, "{lit}");
    }

    #[test]
    fn position_conjugation_symmetry() {
        let m = Modulus::real(0.7).unwrap();
        let (x3, x2, x1) = (c(0.31, 0.0), c(-0.17, 0.0), c(0.44, 0.0));
        for (s3, s2, s1) in TRIPLES {
            for conv in [HConvention::Plus, HConvention::Minus] {
                let r = position_conj_residuals(x3, x2, x1, s3, s2, s1, conv, &m).unwrap();
                assert!(r[0] < 1e-10 && r[1] < 1e-10, "{r:?}");
            }
        }
    }

    #[test]
    fn momentum_conjugation_symmetry() {
        let m = Modulus::real(0.7).unwrap();
        for (k2, k1) in [(0.21, 0.37), (-0.4, 0.15)] {
            let r = momentum_conj_residuals(k2, k1, 0.3, 0.5, 0.2, &m).unwrap();
            assert!(r[0] < 1e-8 && r[1] < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn momentum_kernel_has_a_simple_pole_off_the_pinch() {
        // k1 = -s1 + iQ/2 is a simple pole of the prefactor-free integral in k1
        let m = Modulus::real(0.7).unwrap();
        let (s3, s2, s1) = TRIPLES[0];
        let p = c(-s1, m.qq().re / 2.0);
        let f = |d: f64| cgc_momentum_reduced(c(0.21, 0.0), p + c(d, 0.0), s3, s2, s1, CgcContour::Separating, &m).unwrap().norm();
        let order = (f(1e-3) / f(2e-3)).log2();
        assert!((order - 1.0).abs() < 2e-2, "{order}");
    }

    #[test]
    fn dual_modulus_gives_the_same_kernel() {
        let a = Modulus::real(0.7).unwrap();
        let b = Modulus::real(1.0 / 0.7).unwrap();
        let (s3, s2, s1) = TRIPLES[0];
        let u = cgc_momentum_reduced(c(0.21, 0.0), c(0.37, 0.0), s3, s2, s1, CgcContour::Separating, &a).unwrap();
        let v = cgc_momentum_reduced(c(0.21, 0.0), c(0.37, 0.0), s3, s2, s1, CgcContour::Separating, &b).unwrap();
        assert!((u - v).norm() < 1e-9 * u.norm());
    }
}

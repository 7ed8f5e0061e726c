//! Highest-weight sector: transposed generators on the delta functionals at
//! k_n = -s + i(Q/2 + n b) and the series form of the R-matrix.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::grid::CMat;
use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::quadrature::contour_residue;
use crate::specfun::{residue_inv_Gb, wb};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Levels 0..=l_max of the module spanned by delta_{k_n}.
#[derive(Clone, Debug)]
pub struct VermaModule {
    pub s: f64,
    pub l_max: usize,
    pub modulus: Modulus,
    pub k: Vec<Complex64>,
}

impl VermaModule {
    pub fn new(s: f64, l_max: usize, m: &Modulus) -> Self {
        let b = m.b;
        let q = m.qq();
        let k = (0..=l_max).map(|n| -s + I * (q / 2.0 + b * n as f64)).collect();
        VermaModule { s, l_max, modulus: m.clone(), k }
    }

    pub fn dim(&self) -> usize {
        self.l_max + 1
    }
}

/// Coefficient of E^t delta_k = [Q/2b - (i/b)(k - s)]_q delta_{k + ib}.
pub fn e_coeff(k: Complex64, s: f64, m: &Modulus) -> Complex64 {
    m.qnum(m.qq() / (2.0 * m.b) - I / m.b * (k - s))
}

/// Coefficient of F^t delta_k = -[Q/2b + (i/b)(k + s)]_q delta_{k - ib}.
pub fn f_coeff(k: Complex64, s: f64, m: &Modulus) -> Complex64 {
    -m.qnum(m.qq() / (2.0 * m.b) + I / m.b * (k + s))
}

/// Transposed generators as (l_max + 1)-dimensional matrices; column n is the image of delta_{k_n}.
pub struct VermaGens {
    pub e: CMat,
    pub f: CMat,
    pub k: CMat,
    pub k_inv: CMat,
}

pub fn verma_generators(v: &VermaModule) -> VermaGens {
    let d = v.dim();
    let m = &v.modulus;
    let mut e = CMat::zeros(d, d);
    let mut f = CMat::zeros(d, d);
    let mut k = CMat::zeros(d, d);
    let mut k_inv = CMat::zeros(d, d);
    for n in 0..d {
        if n + 1 < d {
            e[(n + 1, n)] = e_coeff(v.k[n], v.s, m);
        }
        if n > 0 {
            f[(n - 1, n)] = f_coeff(v.k[n], v.s, m);
        }
        let kk = (-PI * m.b * v.k[n]).exp();
        k[(n, n)] = kk;
        k_inv[(n, n)] = 1.0 / kk;
    }
    VermaGens { e, f, k, k_inv }
}

/// q^{H (x) H} = e^{-i pi k k'} on V (x) V', from K = q^H with H = i k / b.
fn qhh(a: &VermaModule, c: &VermaModule) -> CMat {
    let d = a.dim() * c.dim();
    CMat::from_fn(d, d, |i, j| {
        if i == j {
            (-I * PI * a.k[i / c.dim()] * c.k[i % c.dim()]).exp()
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Transpose of R = q^{H (x) H} sum_n q^{(n^2 - n)/2} / [n]_q! ((q - q^{-1}) E (x) F)^n q^{H (x) H} on
/// V_{s2} (x) V_{s1}. The transpose of F acts as -F^t, with F^t the lowering map above.
/// E raises the first factor and F lowers the second, so the sum is finite on every level.
pub fn verma_r(v2: &VermaModule, v1: &VermaModule) -> CMat {
    let m = &v2.modulus;
    let q = m.q;
    let g2 = verma_generators(v2);
    let g1 = verma_generators(v1);
    let x = g2.e.kronecker(&g1.f) * (1.0 / q - q);
    let d = v2.dim() * v1.dim();
    let mut sum = CMat::identity(d, d);
    let mut pow = CMat::identity(d, d);
    let mut fact = Complex64::new(1.0, 0.0);
    for n in 1..=v2.l_max.max(v1.l_max) {
        pow = &pow * &x;
        fact *= m.qnum(Complex64::from(n as f64));
        let c = q.powf(0.5 * (n * n - n) as f64) / fact;
        sum += &pow * c;
    }
    let h = qhh(v2, v1);
    &h * sum * &h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VGen {
    E,
    F,
    K,
}

fn coproducts(x: VGen, g2: &VermaGens, g1: &VermaGens) -> (CMat, CMat) {
    match x {
        VGen::K => {
            let d = g2.k.kronecker(&g1.k);
            (d.clone(), d)
        }
        VGen::E => (g2.e.kronecker(&g1.k) + g2.k_inv.kronecker(&g1.e), g2.k.kronecker(&g1.e) + g2.e.kronecker(&g1.k_inv)),
        VGen::F => (g2.f.kronecker(&g1.k) + g2.k_inv.kronecker(&g1.f), g2.k.kronecker(&g1.f) + g2.f.kronecker(&g1.k_inv)),
    }
}

fn restricted(r: &CMat, d: &CMat, dp: &CMat, v2: &VermaModule, v1: &VermaModule) -> f64 {
    let a = d * r - r * dp;
    let scale = (d * r).norm().max(1e-300);
    let n1 = v1.dim();
    let mut acc = 0.0;
    for col in 0..a.ncols() {
        if col / n1 + col % n1 < v2.l_max.min(v1.l_max) {
            acc += a.column(col).norm_squared();
        }
    }
    acc.sqrt() / scale
}

/// Transposed intertwining residual ||Delta(X)^t R^t - R^t Delta'(X)^t|| / ||Delta(X)^t R^t|| on columns
/// of total level below l_max, where truncation cannot reach.
pub fn verma_intertwine_residual(x: VGen, s2: f64, s1: f64, l_max: usize, m: &Modulus) -> Result<f64> {
    if l_max < 2 {
        return Err(Error::ConfigInvalid("l_max must be at least 2".into()));
    }
    let eval = |l: usize| {
        let v2 = VermaModule::new(s2, l, m);
        let v1 = VermaModule::new(s1, l, m);
        let (d, dp) = coproducts(x, &verma_generators(&v2), &verma_generators(&v1));
        restricted(&verma_r(&v2, &v1), &d, &dp, &v2, &v1)
    };
    let r = eval(l_max);
    if r > 1e-8 {
        let r2 = eval(l_max + 1);
        if r2 >= r {
            return Err(Error::TruncationLeak(format!("residual {r:e} does not drop with l_max")));
        }
    }
    Ok(r)
}

/// w_n = Res_{x = iQ/2 + i n b} 1/w_b(x) by a small circle whose radius stays below half the
/// distance to the nearest other zero of w_b.
pub fn wb_inverse_residue(n: usize, m: &Modulus) -> Result<Complex64> {
    let b = m.b;
    let x0 = I * (m.qq() / 2.0 + b * n as f64);
    let mut gap = f64::INFINITY;
    for a in 0..=n + 2 {
        for c in 0..=(n as f64 * b.norm_sqr()).ceil() as usize + 2 {
            if a == n && c == 0 {
                continue;
            }
            let z = I * (m.qq() / 2.0 + b * a as f64 + c as f64 / b);
            gap = gap.min((z - x0).norm());
        }
    }
    let f = |x: Complex64| wb(x, m).map(|v| 1.0 / v.value).unwrap_or(Complex64::new(f64::NAN, 0.0));
    contour_residue(&f, x0, (0.3 * gap).min(0.1))
}

/// Coefficients of delta_{k2 + ibl} (x) delta_{k_{n - l}} in R^t (delta_{k2} (x) delta_{k_n}), l = 0..=n,
/// from the residues of the momentum kernel.
pub fn hw_continuation_coeffs(n: usize, k2: Complex64, s2: f64, s1: f64, m: &Modulus) -> Result<Vec<Complex64>> {
    let b = m.b;
    let k1 = -s1 + I * (m.qq() / 2.0 + b * n as f64);
    let wn = wb_inverse_residue(n, m)?;
    (0..=n)
        .map(|l| {
            let lb = I * b * l as f64;
            let k2p = k2 + lb;
            let phase = (-PI * I * ((k1 - lb) * k2 + k1 * k2p)).exp();
            let ratio = wb(s2 - k2, m)?.value / wb(s2 - k2p, m)?.value;
            Ok(residue_inv_Gb(l, 0, m)? * phase * wb_inverse_residue(n - l, m)? / wn * ratio)
        })
        .collect()
}

/// The same coefficients from the series, with E^t acting on a generic delta_{k2} of P_{s2}.
pub fn hw_series_coeffs(n: usize, k2: Complex64, s2: f64, s1: f64, m: &Modulus) -> Vec<Complex64> {
    let b = m.b;
    let q = m.q;
    let k1 = -s1 + I * (m.qq() / 2.0 + b * n as f64);
    let mut fact = Complex64::new(1.0, 0.0);
    (0..=n)
        .map(|l| {
            if l > 0 {
                fact *= m.qnum(Complex64::from(l as f64));
            }
            let lb = I * b * l as f64;
            let mut c = (-I * PI * ((k2 + lb) * (k1 - lb) + k2 * k1)).exp() * q.powf(0.5 * (l * l) as f64 - 0.5 * l as f64)
                / fact
                * (q - 1.0 / q).powi(l as i32);
            for j in 0..l {
                let jb = I * b * j as f64;
                c *= -e_coeff(k2 + jb, s2, m) * f_coeff(k1 - jb, s1, m);
            }
            c
        })
        .collect()
}

/// Largest relative mismatch between the residue coefficients and the series coefficients once the
/// residue side is divided by G_0 = Res_{x=0} 1/G_b(Q + x) = -1/2pi.
pub fn hw_continuation_check(n: usize, s2: f64, s1: f64, m: &Modulus) -> Result<f64> {
    let g0 = residue_inv_Gb(0, 0, m)?;
    let mut worst: f64 = 0.0;
    for k2 in [Complex64::new(0.3, 0.1), Complex64::new(-0.4, 0.05)] {
        let a = hw_continuation_coeffs(n, k2, s2, s1, m)?;
        let c = hw_series_coeffs(n, k2, s2, s1, m);
        for (x, y) in a.iter().zip(&c) {
            worst = worst.max((x / g0 - y).norm() / y.norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m() -> Modulus {
        Modulus::real(0.7).unwrap()
    }

    #[test]
    fn f_annihilates_the_highest_weight() {
        let v = VermaModule::new(0.2, 6, &m());
        assert!(f_coeff(v.k[0], v.s, &m()).norm() < 1e-15);
        let g = verma_generators(&v);
        assert!(g.f.column(0).norm() < 1e-15);
        assert!(g.e[(1, 0)].norm() > 1e-3);
    }

    #[test]
    fn transposed_generators_obey_the_opposite_algebra() {
        let v = VermaModule::new(0.3, 5, &m());
        let g = verma_generators(&v);
        let q = m().q;
        let r = (&g.k * &g.e - &g.e * &g.k / q).norm();
        assert!(r < 1e-12, "{r}");
        let comm = &g.e * &g.f - &g.f * &g.e;
        let rhs = (&g.k * &g.k - &g.k_inv * &g.k_inv) / (q - 1.0 / q);
        // the top row is cut by truncation
        let d = comm - rhs;
        assert!(d.view((0, 0), (5, 5)).norm() < 1e-10);
    }

    #[test]
    fn zeroth_term_is_the_cartan_factor() {
        let v2 = VermaModule::new(0.5, 0, &m());
        let v1 = VermaModule::new(0.2, 0, &m());
        let r = verma_r(&v2, &v1);
        let e = (-I * PI * 2.0 * v2.k[0] * v1.k[0]).exp();
        assert!((r[(0, 0)] - e).norm() < 1e-14);
    }

    #[test]
    fn intertwining_is_exact_on_safe_levels() {
        for x in [VGen::E, VGen::F, VGen::K] {
            let r = verma_intertwine_residual(x, 0.5, 0.2, 6, &m()).unwrap();
            assert!(r < 1e-10, "{x:?} {r}");
        }
    }

    #[test]
    fn wb_residue_matches_gb_residue() {
        // w_b(x) = e^{i pi (Q^2/4 + x^2)/2} G_b(Q/2 - ix), so w_n = i e^{-i pi (Q^2/4 + x_n^2)/2} G_n
        let m = m();
        for n in 0..3 {
            let xn = I * (m.qq() / 2.0 + m.b * n as f64);
            let closed = I * (-I * PI * (m.qq() * m.qq() / 4.0 + xn * xn) / 2.0).exp() * residue_inv_Gb(n, 0, &m).unwrap();
            let num = wb_inverse_residue(n, &m).unwrap();
            assert!((num - closed).norm() < 1e-8 * closed.norm(), "{n}: {num} {closed}");
        }
    }

    #[test]
    fn continuation_matches_series() {
        assert!(hw_continuation_check(0, 0.5, 0.2, &m()).unwrap() < 1e-10);
        assert!(hw_continuation_check(1, 0.5, 0.2, &m()).unwrap() < 1e-7);
        assert!(hw_continuation_check(2, 0.5, 0.2, &m()).unwrap() < 1e-6);
    }
}

//! The principal-series generators E_s, F_s, K_s on the lattice and the checks built on them.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::funcs::{complex_power, real_power, symmetrize, HermEig};
use super::grid::{diff_norm, mat_vec, norm, sub, CMat, CVec, Grid};
use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::specfun::log_wb;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Position,
    Momentum,
    None,
}

/// A dense lattice operator, stored in the position basis.
#[derive(Clone, Debug)]
pub struct LatticeOp {
    pub matrix: CMat,
    /// Basis in which the operator is diagonal, if any.
    pub basis: Basis,
    pub grid: Grid,
    /// ||M - M^dagger|| / ||M|| before symmetrization (zero when not symmetrized).
    pub hermiticity_defect: f64,
}

impl LatticeOp {
    pub fn apply(&self, psi: &[Complex64]) -> CVec {
        mat_vec(&self.matrix, psi)
    }

    fn hermitian(grid: &Grid, m: CMat, basis: Basis) -> Self {
        let (h, d) = symmetrize(&m);
        LatticeOp { matrix: h, basis, grid: grid.clone(), hermiticity_defect: d }
    }

    pub fn eig(&self) -> HermEig {
        HermEig::new(&self.matrix)
    }
}

fn real_b(m: &Modulus) -> Result<f64> {
    if !m.is_real() {
        return Err(Error::WrongRegime);
    }
    Ok(m.b.re)
}

fn cvec(v: impl Iterator<Item = f64>) -> CVec {
    v.map(|a| Complex64::new(a, 0.0)).collect()
}

/// D A D for a real diagonal D.
fn sandwich(d: &[f64], a: &CMat) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (d[i] * d[j]))
}

/// E_s = e^{pi b x} cosh(pi b (p - s)) / sin(pi b^2) e^{pi b x}, F_s with x -> -x and s -> -s,
/// K_s = e^{-pi b p}, on one lattice.
#[derive(Clone, Debug)]
pub struct Efk {
    pub grid: Grid,
    pub modulus: Modulus,
    pub b: f64,
    pub s: f64,
    pub e: LatticeOp,
    pub f: LatticeOp,
    pub k: LatticeOp,
    pub k_inv: LatticeOp,
    /// e^{-pi b k} on the momentum grid.
    pub k_diag: Vec<f64>,
    up: CVec,
    dn: CVec,
    ce: CVec,
    cf: CVec,
}

pub fn build_efk_s(s: f64, g: &Grid, m: &Modulus) -> Result<Efk> {
    let b = real_b(m)?;
    let sn = (PI * b * b).sin();
    let up: Vec<f64> = g.x.iter().map(|&x| (PI * b * x).exp()).collect();
    let dn: Vec<f64> = g.x.iter().map(|&x| (-PI * b * x).exp()).collect();
    let ce_d = cvec(g.k.iter().map(|&k| (PI * b * (k - s)).cosh() / sn));
    let cf_d = cvec(g.k.iter().map(|&k| (PI * b * (k + s)).cosh() / sn));
    let ce = g.p_matrix(&ce_d);
    let cf = g.p_matrix(&cf_d);
    let k_diag: Vec<f64> = g.k.iter().map(|&k| (-PI * b * k).exp()).collect();
    let k = g.p_matrix(&cvec(k_diag.iter().cloned()));
    let k_inv = g.p_matrix(&cvec(k_diag.iter().map(|&v| 1.0 / v)));
    Ok(Efk {
        grid: g.clone(),
        modulus: m.clone(),
        b,
        s,
        e: LatticeOp::hermitian(g, sandwich(&up, &ce), Basis::None),
        f: LatticeOp::hermitian(g, sandwich(&dn, &cf), Basis::None),
        k: LatticeOp::hermitian(g, k, Basis::Momentum),
        k_inv: LatticeOp::hermitian(g, k_inv, Basis::Momentum),
        k_diag,
        up: cvec(up.into_iter()),
        dn: cvec(dn.into_iter()),
        ce: ce_d,
        cf: cf_d,
    })
}

/// The b -> 1/b generators acting on the same lattice; they represent U_q~ with q~ = e^{i pi / b^2}.
pub fn build_dual_efk_s(s: f64, g: &Grid, m: &Modulus) -> Result<Efk> {
    build_efk_s(s, g, &m.dual())
}

/// max over states of ||(A - B) psi|| / ||psi||.
pub fn max_residual<A, B>(states: &[CVec], a: A, b: B) -> f64
where
    A: Fn(&[Complex64]) -> CVec,
    B: Fn(&[Complex64]) -> CVec,
{
    states.iter().map(|psi| diff_norm(&a(psi), &b(psi)) / norm(psi)).fold(0.0, f64::max)
}

/// Residuals of the defining relations and of the Casimir value on a set of states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationResiduals {
    pub ke: f64,
    pub kf: f64,
    pub ef: f64,
    pub casimir: f64,
}

impl RelationResiduals {
    pub fn max(&self) -> f64 {
        self.ke.max(self.kf).max(self.ef).max(self.casimir)
    }
}

impl Efk {
    pub fn q(&self) -> Complex64 {
        self.modulus.q
    }

    /// E psi, applied factor by factor through the FFT.
    pub fn apply_e(&self, psi: &[Complex64]) -> CVec {
        let g = &self.grid;
        g.apply_x(&self.up, &g.apply_p(&self.ce, &g.apply_x(&self.up, psi)))
    }

    pub fn apply_f(&self, psi: &[Complex64]) -> CVec {
        let g = &self.grid;
        g.apply_x(&self.dn, &g.apply_p(&self.cf, &g.apply_x(&self.dn, psi)))
    }

    /// K^a psi.
    pub fn apply_k(&self, a: f64, psi: &[Complex64]) -> CVec {
        self.grid.apply_p(&cvec(self.k_diag.iter().map(|&v| v.powf(a))), psi)
    }

    /// (K^2 - K^{-2}) / (q - q^{-1}) psi.
    pub fn ef_rhs(&self, psi: &[Complex64]) -> CVec {
        let q = self.q();
        let d: CVec = self.k_diag.iter().map(|&v| Complex64::from(v * v - 1.0 / (v * v)) / (q - 1.0 / q)).collect();
        self.grid.apply_p(&d, psi)
    }

    /// cosh^2(pi b s) / sin^2(pi b^2).
    pub fn casimir_value(&self) -> f64 {
        let c = (PI * self.b * self.s).cosh() / (PI * self.b * self.b).sin();
        c * c
    }

    pub fn casimir_apply(&self, psi: &[Complex64]) -> CVec {
        let q = self.q();
        let fe = self.apply_f(&self.apply_e(psi));
        let d: CVec = self
            .k_diag
            .iter()
            .map(|&v| (q * v * v + 1.0 / (q * v * v) - 2.0) / ((q - 1.0 / q) * (q - 1.0 / q)))
            .collect();
        let kk = self.grid.apply_p(&d, psi);
        fe.iter().zip(&kk).map(|(a, b)| a + b).collect()
    }

    pub fn relation_residuals(&self, states: &[CVec]) -> RelationResiduals {
        let q = self.q();
        let ke = max_residual(states, |p| self.apply_k(1.0, &self.apply_e(p)), |p| {
            self.apply_e(&self.apply_k(1.0, p)).iter().map(|v| q * v).collect()
        });
        let kf = max_residual(states, |p| self.apply_k(1.0, &self.apply_f(p)), |p| {
            self.apply_f(&self.apply_k(1.0, p)).iter().map(|v| v / q).collect()
        });
        let ef = max_residual(
            states,
            |p| sub(&self.apply_e(&self.apply_f(p)), &self.apply_f(&self.apply_e(p))),
            |p| self.ef_rhs(p),
        );
        let c = self.casimir_value();
        let casimir = max_residual(states, |p| self.casimir_apply(p), |p| p.iter().map(|v| v * c).collect());
        RelationResiduals { ke, kf, ef, casimir }
    }

    /// GridTooCoarse unless every relation residual is below `tol` on the calibration states.
    pub fn calibrate(&self, states: &[CVec], tol: f64) -> Result<RelationResiduals> {
        let r = self.relation_residuals(states);
        if r.max() > tol {
            return Err(Error::GridTooCoarse(format!("relation residual {:.3e} above {tol:.1e}", r.max())));
        }
        Ok(r)
    }
}

/// Residuals of the modular-duality powers (2 sin(pi b^2) X)^{1/b^2} = 2 sin(pi / b^2) X~ for X = E, F
/// and of K^{1/b^2} = K~.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityResiduals {
    pub e: f64,
    pub f: f64,
    pub k: f64,
}

pub fn power_duality_residual(s: f64, g: &Grid, m: &Modulus, states: &[CVec]) -> Result<DualityResiduals> {
    let a = build_efk_s(s, g, m)?;
    let d = build_dual_efk_s(s, g, m)?;
    let gamma = 1.0 / (a.b * a.b);
    let sn = 2.0 * (PI * a.b * a.b).sin();
    let sd = 2.0 * (PI * gamma).sin();
    let pow = |x: &LatticeOp, dual_apply: &dyn Fn(&[Complex64]) -> CVec| -> Result<f64> {
        let eig = HermEig::new(&(&x.matrix * Complex64::from(sn)));
        eig.require_positive()?;
        Ok(max_residual(states, |p| eig.apply(|l| real_power(l, gamma), p), |p| {
            dual_apply(p).iter().map(|v| v * sd).collect()
        }))
    };
    let e = pow(&a.e, &|p| d.apply_e(p))?;
    let f = pow(&a.f, &|p| d.apply_f(p))?;
    let kd: CVec = cvec(a.k_diag.iter().map(|&v| v.powf(gamma)));
    let k = max_residual(states, |p| g.apply_p(&kd, p), |p| d.grid.apply_p(&cvec(d.k_diag.iter().cloned()), p));
    Ok(DualityResiduals { e, f, k })
}

/// Antipode residuals: sigma(X) is built from the generator formula with p -> -p, s -> -s and
/// x -> x + iQ/2, the imaginary shift realized as conjugation by T = e^{-pi Q p}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AntipodeResiduals {
    /// ||sigma(E) psi + q E psi|| / ||psi||
    pub e: f64,
    /// ||sigma(F) psi + q^{-1} F psi|| / ||psi||
    pub f: f64,
    /// ||sigma(K) psi - K^{-1} psi|| / ||psi||
    pub k: f64,
    /// sigma(sigma(K)) against K
    pub kk: f64,
}

/// Largest amplification ||T^{-1} psi|| / ||psi|| tolerated before a state is declared unsuitable.
pub const ANTIPODE_MAX_GAIN: f64 = 1e8;

pub fn antipode_generator_residual(s: f64, g: &Grid, m: &Modulus, states: &[CVec]) -> Result<AntipodeResiduals> {
    let a = build_efk_s(s, g, m)?;
    let b = a.b;
    let q = a.q();
    let qs = b + 1.0 / b;
    let t = cvec(g.k.iter().map(|&k| (-PI * qs * k).exp()));
    let t_inv = cvec(g.k.iter().map(|&k| (PI * qs * k).exp()));
    for psi in states {
        let gain = norm(&g.apply_p(&t_inv, psi)) / norm(psi);
        if !(gain < ANTIPODE_MAX_GAIN) {
            return Err(Error::Unbounded(format!("shift weight amplifies a test state by {gain:.2e}")));
        }
    }
    let sn = (PI * b * b).sin();
    let up = cvec(g.x.iter().map(|&x| (PI * b * x).exp()));
    let dn = cvec(g.x.iter().map(|&x| (-PI * b * x).exp()));
    // cosh(pi b (-p - (-s))) and cosh(pi b (-p + (-s)))
    let ce = cvec(g.k.iter().map(|&k| (PI * b * (-k + s)).cosh() / sn));
    let cf = cvec(g.k.iter().map(|&k| (PI * b * (-k - s)).cosh() / sn));
    // e^{pi b (x + iQ/2)} = T e^{pi b x} T^{-1}
    let shifted = |d: &CVec, psi: &[Complex64]| g.apply_p(&t, &g.apply_x(d, &g.apply_p(&t_inv, psi)));
    let sig = |d: &CVec, c: &CVec, psi: &[Complex64]| shifted(d, &g.apply_p(c, &shifted(d, psi)));
    let e = max_residual(states, |p| sig(&up, &ce, p), |p| a.apply_e(p).iter().map(|v| -q * v).collect());
    let f = max_residual(states, |p| sig(&dn, &cf, p), |p| a.apply_f(p).iter().map(|v| -v / q).collect());
    // sigma(K) = e^{-pi b (-p)}
    let sk = cvec(g.k.iter().map(|&k| (PI * b * k).exp()));
    let k = max_residual(states, |p| g.apply_p(&sk, p), |p| a.apply_k(-1.0, p));
    let ssk = cvec(g.k.iter().map(|&k| (-PI * b * k).exp()));
    let kk = max_residual(states, |p| g.apply_p(&ssk, p), |p| a.apply_k(1.0, p));
    Ok(AntipodeResiduals { e, f, k, kk })
}

/// psi_b(t) = i d/dt log w_b(t) by a central difference with step h.
pub fn psi_b(t: f64, m: &Modulus, h: f64) -> Result<f64> {
    let a = log_wb(Complex64::new(t + h, 0.0), m)?.value;
    let c = log_wb(Complex64::new(t - h, 0.0), m)?.value;
    // log w_b is i * (real phase) on the real line; unwrap the difference
    let mut d = (a - c).im;
    d -= (d / (2.0 * PI)).round() * 2.0 * PI;
    Ok(-d / (2.0 * h))
}

fn wb_diag(g: &Grid, m: &Modulus, f: impl Fn(f64) -> f64) -> Result<CVec> {
    g.k.iter().map(|&k| Ok(log_wb(Complex64::new(f(k), 0.0), m)?.value.exp())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductForm {
    /// e_b = w_b(s - p) e^{2 pi b x} w_b(p - s), f_b = w_b(s + p) e^{-2 pi b x} w_b(-s - p)
    EFw,
    /// e_b = exp(2 pi b x + b psi_b(s - p)), f_b = exp(-2 pi b x + b psi_b(s + p))
    ExpEF,
}

/// Step of the psi_b central difference.
pub const PSI_STEP: f64 = 1e-4;

/// Reduced single-particle form (p = (p1 - p2)/2, x = x1 - x2) of the product representations of
/// e_b = 2 sin(pi b^2) E and f_b = 2 sin(pi b^2) F, compared with the direct construction.
pub fn product_rep_residual(which: ProductForm, s: f64, g: &Grid, m: &Modulus, states: &[CVec]) -> Result<f64> {
    let a = build_efk_s(s, g, m)?;
    let b = a.b;
    let sn = Complex64::from(2.0 * (PI * b * b).sin());
    let direct_e = |p: &[Complex64]| -> CVec { a.apply_e(p).iter().map(|v| v * sn).collect() };
    let direct_f = |p: &[Complex64]| -> CVec { a.apply_f(p).iter().map(|v| v * sn).collect() };
    match which {
        ProductForm::EFw => {
            let w_l = wb_diag(g, m, |k| s - k)?;
            let w_r = wb_diag(g, m, |k| k - s)?;
            let v_l = wb_diag(g, m, |k| s + k)?;
            let v_r = wb_diag(g, m, |k| -s - k)?;
            let up = cvec(g.x.iter().map(|&x| (2.0 * PI * b * x).exp()));
            let dn = cvec(g.x.iter().map(|&x| (-2.0 * PI * b * x).exp()));
            let re = max_residual(states, |p| g.apply_p(&w_l, &g.apply_x(&up, &g.apply_p(&w_r, p))), direct_e);
            let rf = max_residual(states, |p| g.apply_p(&v_l, &g.apply_x(&dn, &g.apply_p(&v_r, p))), direct_f);
            Ok(re.max(rf))
        }
        ProductForm::ExpEF => {
            let (le, lf) = log_generators(&a, m)?;
            let ee = HermEig::new(&le);
            let ef = HermEig::new(&lf);
            let re = max_residual(states, |p| ee.apply(|l| Complex64::from(l.exp()), p), direct_e);
            let rf = max_residual(states, |p| ef.apply(|l| Complex64::from(l.exp()), p), direct_f);
            Ok(re.max(rf))
        }
    }
}

/// The Hermitian exponents 2 pi b x + b psi_b(s - p) and -2 pi b x + b psi_b(s + p).
fn log_generators(a: &Efk, m: &Modulus) -> Result<(CMat, CMat)> {
    let g = &a.grid;
    let b = a.b;
    let s = a.s;
    let pe: Vec<f64> = g.k.iter().map(|&k| psi_b(s - k, m, PSI_STEP).map(|v| b * v)).collect::<Result<_>>()?;
    let pf: Vec<f64> = g.k.iter().map(|&k| psi_b(s + k, m, PSI_STEP).map(|v| b * v)).collect::<Result<_>>()?;
    let x_e = g.x_matrix(&cvec(g.x.iter().map(|&x| 2.0 * PI * b * x)));
    let x_f = g.x_matrix(&cvec(g.x.iter().map(|&x| -2.0 * PI * b * x)));
    Ok((x_e + g.p_matrix(&cvec(pe.into_iter())), x_f + g.p_matrix(&cvec(pf.into_iter()))))
}

/// Residual of [log e_b + log f_b, H] with H = i p / b, and of log e_b + log f_b against the
/// momentum-diagonal b (psi_b(s + p) + psi_b(s - p)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogSumResiduals {
    pub commutator: f64,
    pub diagonal: f64,
}

pub fn log_sum_residual(s: f64, g: &Grid, m: &Modulus, states: &[CVec]) -> Result<LogSumResiduals> {
    let a = build_efk_s(s, g, m)?;
    let b = a.b;
    let sn = Complex64::from(2.0 * (PI * b * b).sin());
    let ee = HermEig::new(&(&a.e.matrix * sn));
    let ef = HermEig::new(&(&a.f.matrix * sn));
    ee.require_positive()?;
    ef.require_positive()?;
    let l = ee.matrix(|v| Complex64::from(v.ln())) + ef.matrix(|v| Complex64::from(v.ln()));
    let h = cvec(g.k.iter().map(|&k| k / b)).into_iter().map(|v| v * I).collect::<CVec>();
    let commutator = max_residual(states, |p| mat_vec(&l, &g.apply_p(&h, p)), |p| g.apply_p(&h, &mat_vec(&l, p)));
    let diag: CVec = g
        .k
        .iter()
        .map(|&k| Ok(Complex64::from(b * (psi_b(a.s + k, m, PSI_STEP)? + psi_b(a.s - k, m, PSI_STEP)?))))
        .collect::<Result<_>>()?;
    let diagonal = max_residual(states, |p| mat_vec(&l, p), |p| g.apply_p(&diag, p));
    Ok(LogSumResiduals { commutator, diagonal })
}

/// Residuals of [E, F^alpha] = [alpha]_q [2H + alpha - 1]_q F^{alpha - 1} and
/// [E^alpha, F] = [alpha]_q [2H - alpha + 1]_q E^{alpha - 1}, with 2H = 2ip/b, in the reduced form.
pub fn complex_power_commutator_residual(alpha: Complex64, s: f64, g: &Grid, m: &Modulus, states: &[CVec]) -> Result<f64> {
    let a = build_efk_s(s, g, m)?;
    let b = a.b;
    let ee = a.e.eig();
    let ef = a.f.eig();
    ee.require_positive()?;
    ef.require_positive()?;
    let qa = m.qnum(alpha);
    let h2: Vec<Complex64> = g.k.iter().map(|&k| 2.0 * I * k / b).collect();
    let d_f: CVec = h2.iter().map(|&h| qa * m.qnum(h + alpha - 1.0)).collect();
    let d_e: CVec = h2.iter().map(|&h| qa * m.qnum(h - alpha + 1.0)).collect();
    let pw = |e: &HermEig, c: Complex64, p: &[Complex64]| e.apply(|l| complex_power(l, c), p);
    let r1 = max_residual(
        states,
        |p| sub(&a.apply_e(&pw(&ef, alpha, p)), &pw(&ef, alpha, &a.apply_e(p))),
        |p| g.apply_p(&d_f, &pw(&ef, alpha - 1.0, p)),
    );
    let r2 = max_residual(
        states,
        |p| sub(&pw(&ee, alpha, &a.apply_f(p)), &a.apply_f(&pw(&ee, alpha, p))),
        |p| g.apply_p(&d_e, &pw(&ee, alpha - 1.0, p)),
    );
    Ok(r1.max(r2))
}

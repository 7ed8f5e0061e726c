//! Haar functional on lattice families O_s and the adjoint-action invariance check.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::rc::Rc;

use super::efk::{build_efk_s, Efk};
use super::grid::{norm, CMat, CVec, Grid};
use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::quadrature::gauss_legendre;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Plancherel weight 4 sinh(2 pi b s) sinh(2 pi s / b).
pub fn plancherel(s: f64, b: f64) -> f64 {
    4.0 * (2.0 * PI * b * s).sinh() * (2.0 * PI * s / b).sinh()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AdGen {
    K,
    E,
    F,
    EF,
}

/// Finite-rank O = sum_j |a_j><c_j| built from randomly placed Gaussians, scaled by chi(s) = e^{-s^2}.
/// The vectors are kept as exact momentum samples so that unbounded momentum weights act on them pointwise.
pub struct RandomFamily {
    pub grid: Grid,
    pub a: Vec<CVec>,
    pub c: Vec<CVec>,
    params_a: Vec<GaussParams>,
}

/// e^{-pi^2 w^2 (k - k0)^2 + i ph - 2 pi i (k - k0) x0} / norm, the momentum profile of a kicked Gaussian.
#[derive(Clone, Copy, Debug)]
struct GaussParams {
    x0: f64,
    k0: f64,
    w: f64,
    ph: f64,
    norm: f64,
}

impl GaussParams {
    fn eval(&self, k: Complex64) -> Complex64 {
        let d = k - self.k0;
        (-PI * PI * self.w * self.w * d * d + I * self.ph - 2.0 * PI * I * d * self.x0).exp() / self.norm
    }
}

impl RandomFamily {
    pub fn new(g: &Grid, rank: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| {
            let mut p = GaussParams {
                x0: rng.gen_range(-1.0..1.0),
                k0: rng.gen_range(-0.3..0.3),
                w: rng.gen_range(0.6..0.9),
                ph: rng.gen_range(0.0..2.0 * PI),
                norm: 1.0,
            };
            let v = g.sample_k(|k| p.eval(k.into()));
            p.norm = norm(&v);
            p
        };
        let params_a: Vec<GaussParams> = (0..rank).map(|_| draw(&mut rng)).collect();
        let params_c: Vec<GaussParams> = (0..rank).map(|_| draw(&mut rng)).collect();
        let sample = |p: &GaussParams| g.sample_k(|k| p.eval(k.into()));
        RandomFamily {
            grid: g.clone(),
            a: params_a.iter().map(sample).collect(),
            c: params_c.iter().map(sample).collect(),
            params_a,
        }
    }

    pub fn chi(s: f64) -> f64 {
        (-s * s).exp()
    }

    fn pos(&self, v: &[Complex64]) -> CVec {
        let mut u = v.to_vec();
        self.grid.to_position(&mut u);
        u
    }

    /// Dense O in the position basis.
    pub fn matrix(&self) -> CMat {
        let n = self.grid.n;
        let mut o = CMat::zeros(n, n);
        for (a, c) in self.a.iter().zip(&self.c) {
            let (a, c) = (self.pos(a), self.pos(c));
            for i in 0..n {
                for j in 0..n {
                    o[(i, j)] += a[i] * c[j].conj();
                }
            }
        }
        o
    }
}

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn scaled(d: &[f64], v: &[Complex64]) -> CVec {
    v.iter().zip(d).map(|(a, b)| a * b).collect()
}

/// Momentum samples of a position vector, multiplied by d.
fn weighted(g: &Grid, d: &[f64], v: &[Complex64]) -> CVec {
    let mut u = v.to_vec();
    g.to_momentum(&mut u);
    scaled(d, &u)
}

fn counit(x: AdGen) -> f64 {
    match x {
        AdGen::K => 1.0,
        _ => 0.0,
    }
}

/// Terms Tr(W X' O sigma(X'')) of the left adjoint action for O = |a><c|, with W = e^{-2 pi Q p},
/// sigma(K) = K^{-1}, sigma(E) = -qE, sigma(F) = -q^{-1}F and
/// Delta(EF) = EF (x) K^2 + EK^{-1} (x) KF + K^{-1}F (x) EK + K^{-2} (x) EF.
/// Every trace is written as an inner product that puts the momentum weights on the analytic side,
/// or splits them evenly when generators sit on both sides.
fn ad_terms(x: AdGen, ops: &Efk, w: &[f64], a: &[Complex64], c: &[Complex64], fam: &RandomFamily) -> Vec<Complex64> {
    let g = &fam.grid;
    let q = ops.q();
    let kd = &ops.k_diag;
    let diag = |f: &dyn Fn(usize) -> f64| (0..g.n).map(f).collect::<Vec<f64>>();
    let pos = |v: &[Complex64]| fam.pos(v);
    match x {
        AdGen::K => {
            let d = diag(&|i| w[i] * kd[i] / kd[i]);
            vec![dot(c, &scaled(&d, a))]
        }
        AdGen::E | AdGen::F => {
            let (gen, coef): (&dyn Fn(&[Complex64]) -> CVec, Complex64) = match x {
                AdGen::E => (&|v| ops.apply_e(v), -q),
                _ => (&|v| ops.apply_f(v), -1.0 / q),
            };
            let d = diag(&|i| w[i] / kd[i]);
            vec![
                dot(&scaled(&d, c), &weighted(g, &vec![1.0; g.n], &gen(&pos(a)))),
                dot(&weighted(g, &vec![1.0; g.n], &gen(&pos(c))), &scaled(&d, a)) * coef,
            ]
        }
        AdGen::EF => {
            let ones = vec![1.0; g.n];
            let d2 = diag(&|i| w[i] / (kd[i] * kd[i]));
            let half = diag(&|i| (w[i] / kd[i]).sqrt());
            let kinv = diag(&|i| 1.0 / kd[i]);
            let ef = |v: &[Complex64]| ops.apply_e(&ops.apply_f(v));
            vec![
                dot(&scaled(&d2, c), &weighted(g, &ones, &ef(&pos(a)))),
                dot(&weighted(g, &half, &ops.apply_f(&pos(c))), &weighted(g, &half, &ops.apply_e(&pos(&scaled(&kinv, a))))) * (-1.0 / q),
                dot(&weighted(g, &half, &ops.apply_e(&pos(&scaled(&kinv, c)))), &weighted(g, &half, &ops.apply_f(&pos(a)))) * (-q),
                dot(&weighted(g, &ones, &ef(&pos(c))), &scaled(&d2, a)),
            ]
        }
    }
}

/// How the generators act inside the traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HaarMode {
    /// E_s, F_s as FFT-applied lattice operators.
    Lattice,
    /// E_s, F_s as exact complex momentum shifts on the analytic Gaussian profiles, traced on the momentum grid.
    Analytic,
}

type Profile = Rc<dyn Fn(Complex64) -> Complex64>;

fn shift_op(p: Profile, coef: Profile, shift: Complex64) -> Profile {
    Rc::new(move |k| coef(k) * p(k + shift))
}

/// Momentum profiles with e^{pi b x} acting as k -> k + ib/2, so
/// (E v)(k) = cosh(pi b (k + ib/2 - s)) / sin(pi b^2) v(k + ib) and
/// (F v)(k) = cosh(pi b (k - ib/2 + s)) / sin(pi b^2) v(k - ib).
struct AnalyticOps {
    b: f64,
    s: f64,
    qsum: f64,
}

impl AnalyticOps {
    fn e(&self, v: Profile) -> Profile {
        let (b, s) = (self.b, self.s);
        let sn = (PI * b * b).sin();
        shift_op(v, Rc::new(move |k| (PI * b * (k + I * b / 2.0 - s)).cosh() / sn), I * b)
    }

    fn f(&self, v: Profile) -> Profile {
        let (b, s) = (self.b, self.s);
        let sn = (PI * b * b).sin();
        shift_op(v, Rc::new(move |k| (PI * b * (k - I * b / 2.0 + s)).cosh() / sn), -I * b)
    }

    /// K^a W^c as a multiplier, K = e^{-pi b p}, W = e^{-2 pi Q p}.
    fn kw(&self, a: f64, c: f64, v: Profile) -> Profile {
        let (b, qsum) = (self.b, self.qsum);
        Rc::new(move |k| (-PI * b * a * k - 2.0 * PI * qsum * c * k).exp() * v(k))
    }

    /// Tr(W A |a><c| B) = <c| B W A |a> for each term of the adjoint action.
    fn terms(&self, x: AdGen, a: Profile, g: &Grid, c: &[Complex64], q: Complex64) -> Vec<Complex64> {
        let tr = |v: Profile| -> Complex64 { c.iter().zip(&g.k).map(|(cc, &k)| cc.conj() * v(k.into())).sum() };
        match x {
            AdGen::K => vec![tr(self.kw(-1.0, 0.0, self.kw(0.0, 1.0, self.kw(1.0, 0.0, a))))],
            AdGen::E => vec![tr(self.kw(-1.0, 1.0, self.e(a.clone()))), tr(self.e(self.kw(-1.0, 1.0, a))) * (-q)],
            AdGen::F => vec![tr(self.kw(-1.0, 1.0, self.f(a.clone()))), tr(self.f(self.kw(-1.0, 1.0, a))) * (-1.0 / q)],
            AdGen::EF => vec![
                tr(self.kw(-2.0, 1.0, self.e(self.f(a.clone())))),
                tr(self.f(self.kw(-1.0, 1.0, self.e(self.kw(-1.0, 0.0, a.clone()))))) * (-1.0 / q),
                tr(self.kw(-1.0, 0.0, self.e(self.kw(-1.0, 1.0, self.f(a.clone()))))) * (-q),
                tr(self.f(self.e(self.kw(-2.0, 1.0, a)))),
            ],
        }
    }
}

/// Residual of h_l(ad_X O) = eps(X) h_l(O), relative to the sum of the magnitudes of the terms, where
/// h_l(O) = int dm(s) chi(s) Tr(e^{-2 pi Q p} O) by Gauss-Legendre on [0, s_max].
pub fn haar_adjoint_residual(x: AdGen, mode: HaarMode, fam: &RandomFamily, s_nodes: usize, s_max: f64, m: &Modulus) -> Result<f64> {
    let g = &fam.grid;
    let b = m.b_re();
    let qsum = b + 1.0 / b;
    let w: Vec<f64> = g.k.iter().map(|&k| (-2.0 * PI * qsum * k).exp()).collect();
    let (nodes, weights) = gauss_legendre(s_nodes);
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut rhs = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (t, wt) in nodes.iter().zip(&weights) {
        let s = 0.5 * s_max * (t + 1.0);
        let dm = 0.5 * s_max * wt * plancherel(s, b) * RandomFamily::chi(s);
        let terms: Vec<Vec<Complex64>> = match mode {
            HaarMode::Lattice => {
                let ops = build_efk_s(s, g, m)?;
                fam.a.iter().zip(&fam.c).map(|(a, c)| ad_terms(x, &ops, &w, a, c, fam)).collect()
            }
            HaarMode::Analytic => {
                let ops = AnalyticOps { b, s, qsum };
                fam.params_a
                    .iter()
                    .zip(&fam.c)
                    .map(|(pa, c)| {
                        let pa = *pa;
                        ops.terms(x, Rc::new(move |k| pa.eval(k)), g, c, m.q)
                    })
                    .collect()
            }
        };
        for ((a, c), t) in fam.a.iter().zip(&fam.c).zip(terms) {
            for v in t {
                lhs += v * dm;
                scale += (v * dm).norm();
            }
            rhs += dot(c, &scaled(&w, a)) * dm * counit(x);
        }
    }
    if !lhs.is_finite() || scale == 0.0 {
        return Err(Error::NonConvergent("Haar trace is not finite".into()));
    }
    Ok((lhs - rhs).norm() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Modulus, RandomFamily) {
        let m = Modulus::real(0.7).unwrap();
        let g = Grid::new(128, 11.3).unwrap();
        (m, RandomFamily::new(&g, 3, 7))
    }

    #[test]
    fn k_invariance_is_exact() {
        let (m, fam) = setup();
        for mode in [HaarMode::Lattice, HaarMode::Analytic] {
            let r = haar_adjoint_residual(AdGen::K, mode, &fam, 8, 2.0, &m).unwrap();
            assert!(r < 1e-14, "{r}");
        }
    }

    #[test]
    fn e_and_f_invariance_on_the_lattice() {
        let (m, fam) = setup();
        for x in [AdGen::E, AdGen::F] {
            let r = haar_adjoint_residual(x, HaarMode::Lattice, &fam, 8, 2.0, &m).unwrap();
            assert!(r < 1e-5, "{x:?} {r}");
        }
    }

    #[test]
    fn product_invariance_with_analytic_profiles() {
        let (m, fam) = setup();
        for x in [AdGen::E, AdGen::F, AdGen::EF] {
            let r = haar_adjoint_residual(x, HaarMode::Analytic, &fam, 8, 2.0, &m).unwrap();
            assert!(r < 1e-8, "{x:?} {r}");
        }
    }

    #[test]
    fn plancherel_weight_vanishes_at_zero() {
        assert_eq!(plancherel(0.0, 0.7), 0.0);
        assert!(plancherel(0.5, 0.7) > 0.0);
        assert!((plancherel(0.5, 0.7) - plancherel(0.5, 1.0 / 0.7)).abs() < 1e-12);
    }
}
